#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "seema/channel.hpp"
#include "seema/infotheory.hpp"
#include "seema/markov.hpp"
#include "seema/sim.hpp"

namespace seema {

// ============================================================================
// Asymptotic error exponents per scenario class
// ============================================================================

struct ExponentReport {
  double exponent_h0 = 0.0;
  double exponent_h1 = 0.0;
  double argsup_h0 = 0.0;
  double argsup_h1 = 0.0;
  double threshold = 0.0;  // asymptotic detector threshold (y/Z space)
  std::string method;
  LogMgf lambda_h0;  // limiting log-MGF handles behind the exponents
  LogMgf lambda_h1;
};

namespace detail {

// Asymptotic threshold: tau without the log(eta)/N term, from exact group
// weights.
inline double asymptotic_threshold(const SimContext& ctx) {
  double tau = 0.0;
  for (const auto& g : ctx.groups()) {
    tau += g.weight * std::log((1.0 - g.p0) / (1.0 - g.p1));
  }
  return tau;
}

}  // namespace detail

// Error exponents of the threshold detector through the analytical path
// matching the scenario: explicit closed form for i.i.d. equal gains, the
// per-sensor MGF for i.i.d. fading, the deployment-weighted MGF for local
// i.i.d. groups, and the Perron-Frobenius eigenvalue for the Markov field.
inline ExponentReport analytic_exponents(const SimContext& ctx) {
  ExponentReport report;
  const double tau = detail::asymptotic_threshold(ctx);
  report.threshold = tau;
  const ChannelModel& channel = ctx.scenario().channel;
  const double Z = ctx.Z();

  if (ctx.is_markov()) {
    report.method = "markov-perron";
    const MarkovField field = ctx.markov_field();
    const double x = tau / ctx.groups().front().amplitude;
    report.lambda_h0 = [field, channel, Z](double t) {
      return markov_log_mgf(field, Hypothesis::H0, channel, t, Z);
    };
    report.lambda_h1 = [field, channel, Z](double t) {
      return markov_log_mgf(field, Hypothesis::H1, channel, t, Z);
    };
    const auto r0 = legendre_transform(report.lambda_h0, x);
    const auto r1 = legendre_transform(report.lambda_h1, x);
    report.exponent_h0 = r0.value;
    report.argsup_h0 = r0.argsup;
    report.exponent_h1 = r1.value;
    report.argsup_h1 = r1.argsup;
    return report;
  }

  const bool iid = ctx.groups().size() == 1;
  const bool equal_gain = channel.kind() == ChannelModel::Kind::Equal;

  // Self-contained deployment-weighted per-sensor log-MGF of y/Z.
  struct GroupTerm {
    double weight, p, amplitude;
  };
  auto lambda = [&](Hypothesis h) -> LogMgf {
    std::vector<GroupTerm> terms;
    for (const auto& g : ctx.groups()) {
      terms.push_back({g.weight, h == Hypothesis::H0 ? g.p0 : g.p1,
                       g.amplitude});
    }
    return [terms, channel, Z](double t) {
      double total = 0.0;
      for (const GroupTerm& g : terms) {
        const double kappa = channel.mgf(t * g.amplitude / Z);
        if (!std::isfinite(kappa)) {
          return std::numeric_limits<double>::infinity();
        }
        total += g.weight * std::log(g.p * kappa + (1.0 - g.p));
      }
      return total;
    };
  };
  report.lambda_h0 = lambda(Hypothesis::H0);
  report.lambda_h1 = lambda(Hypothesis::H1);

  const auto r0 = legendre_transform(report.lambda_h0, tau);
  const auto r1 = legendre_transform(report.lambda_h1, tau);
  report.argsup_h0 = r0.argsup;
  report.argsup_h1 = r1.argsup;

  if (iid && equal_gain) {
    report.method = "iid-closed-form";
    const auto& g = ctx.groups().front();
    const double closed = asymptotic_exponent_iid(g.p0, g.p1);
    if (std::abs(closed - r0.value) > 1e-7 ||
        std::abs(closed - r1.value) > 1e-7) {
      throw NumericalError(
          "analytic_exponents: closed form and MGF route disagree");
    }
    report.exponent_h0 = closed;
    report.exponent_h1 = closed;
    return report;
  }

  report.method = iid ? "iid-fading-mgf" : "local-iid-mgf";
  report.exponent_h0 = r0.value;
  report.exponent_h1 = r1.value;
  return report;
}

// ============================================================================
// Decay-shape classification
// ============================================================================

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double ssr = 0.0;
};

inline LineFit least_squares_line(std::span<const double> x,
                                  std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) {
    throw std::invalid_argument("least_squares_line: need >= 2 paired points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.ssr += r * r;
  }
  return fit;
}

struct DecayFit {
  LineFit linear;   // -log Pe = a + b N
  LineFit sqrt_fit;  // -log Pe = a + b sqrt(N)
  bool exponential = false;  // linear fit has the lower residual
};

// Classifies the decay of Pe over an N grid: exponential when the
// linear-in-N fit of -log Pe has lower squared residual than the sqrt(N) fit.
inline DecayFit classify_decay(std::span<const double> n,
                               std::span<const double> minus_log_pe) {
  std::vector<double> root(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) root[i] = std::sqrt(n[i]);
  DecayFit out;
  out.linear = least_squares_line(n, minus_log_pe);
  out.sqrt_fit = least_squares_line(root, minus_log_pe);
  out.exponential = out.linear.ssr < out.sqrt_fit.ssr;
  return out;
}

}  // namespace seema
