#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "seema/model.hpp"
#include "seema/numerics.hpp"

namespace seema {

// ============================================================================
// Bernoulli KL divergence
// ============================================================================

// D(q0 || q1) = q0 log(q0/q1) + (1-q0) log((1-q0)/(1-q1)), with 0 log 0 := 0.
inline double kl_bernoulli(double q0, double q1) {
  if (!(q0 >= 0.0 && q0 <= 1.0 && q1 >= 0.0 && q1 <= 1.0)) {
    throw std::domain_error("kl_bernoulli: arguments must be probabilities");
  }
  auto term = [](double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) {
      throw std::domain_error("kl_bernoulli: infinite divergence (q1 boundary)");
    }
    return a * std::log(a / b);
  };
  return term(q0, q1) + term(1.0 - q0, 1.0 - q1);
}

enum class KlDirection { ZeroToOne, OneToZero };

// (1/N) sum_n D(p_{i,n} || p_{j,n}) over the profile list.
inline double average_kl(std::span<const SensorProfile> profiles,
                         KlDirection direction) {
  if (profiles.empty()) {
    throw std::invalid_argument("average_kl: empty profile list");
  }
  double sum = 0.0;
  for (const SensorProfile& s : profiles) {
    sum += direction == KlDirection::ZeroToOne ? kl_bernoulli(s.p0, s.p1)
                                               : kl_bernoulli(s.p1, s.p0);
  }
  return sum / static_cast<double>(profiles.size());
}

// ============================================================================
// Detector configuration
// ============================================================================

// Threshold detector parameters. `profiles` has one entry per sensor; with a
// single entry the deployment is i.i.d.; otherwise entry n applies to sensor
// n (profiles.size() must equal N, or 1).
class DetectorConfig {
public:
  DetectorConfig(double eta, double Z, int N,
                 std::vector<SensorProfile> profiles)
      : eta_(eta), Z_(Z), N_(N), profiles_(std::move(profiles)) {
    if (!(eta_ > 0.0)) throw std::invalid_argument("eta must be > 0");
    if (!(Z_ > 0.0)) throw std::invalid_argument("Z must be > 0");
    if (N_ < 1) throw std::invalid_argument("N must be >= 1");
    if (profiles_.empty() ||
        (profiles_.size() != 1 &&
         profiles_.size() != static_cast<std::size_t>(N_))) {
      throw std::invalid_argument("profiles must have size 1 or N");
    }
  }

  double eta() const { return eta_; }
  double Z() const { return Z_; }
  int N() const { return N_; }
  const std::vector<SensorProfile>& profiles() const { return profiles_; }
  const SensorProfile& profile(int n) const {
    return profiles_.size() == 1 ? profiles_[0] : profiles_[n];
  }
  bool iid() const { return profiles_.size() == 1; }

  // tau = log(eta)/N + (1/N) sum_n log((1-p0n)/(1-p1n))
  double threshold() const {
    return std::log(eta_) / N_ + mean_over_sensors([](const SensorProfile& s) {
             return std::log((1.0 - s.p0) / (1.0 - s.p1));
           });
  }

  // Average divergence margins; the detector guarantees need both > 0.
  double delta0() const { return average_kl_01() + std::log(eta_) / N_; }
  double delta1() const { return average_kl_10() - std::log(eta_) / N_; }

  double average_kl_01() const {
    return mean_over_sensors(
        [](const SensorProfile& s) { return kl_bernoulli(s.p0, s.p1); });
  }
  double average_kl_10() const {
    return mean_over_sensors(
        [](const SensorProfile& s) { return kl_bernoulli(s.p1, s.p0); });
  }

  // (1/N) sum_n p_{i,n} A_n: the mean of y_N / Z under H_i when Z equals the
  // channel mean.
  double mean_amplitude(Hypothesis h) const {
    return mean_over_sensors([h](const SensorProfile& s) {
      return (h == Hypothesis::H0 ? s.p0 : s.p1) * s.amplitude;
    });
  }

  double mean_square_amplitude() const {
    return mean_over_sensors(
        [](const SensorProfile& s) { return s.amplitude * s.amplitude; });
  }

private:
  template <class F>
  double mean_over_sensors(F&& f) const {
    if (profiles_.size() == 1) return f(profiles_[0]);
    double sum = 0.0;
    for (const SensorProfile& s : profiles_) sum += f(s);
    return sum / static_cast<double>(N_);
  }

  double eta_;
  double Z_;
  int N_;
  std::vector<SensorProfile> profiles_;
};

// Threshold test on the normalized received statistic: H1 iff y/Z > tau.
// Exact ties decide H0.
inline Hypothesis decide(double y, const DetectorConfig& cfg) {
  return (y / cfg.Z() > cfg.threshold()) ? Hypothesis::H1 : Hypothesis::H0;
}

// ============================================================================
// Finite-sample bounds
// ============================================================================

inline double asymptotic_exponent_iid(double p0, double p1);

struct BoundPair {
  double h0 = 1.0;  // bound on P(H0 -> H1)
  double h1 = 1.0;  // bound on P(H1 -> H0)
  bool vacuous = false;  // true when a margin is non-positive (N <= N0)
};

// Hoeffding-type bound for independent observations and bounded gains
// |h/Z| < h_max:
//   exp{-N 2 Delta_i^2 / (h_max^2 (1/N) sum A_n^2 + 4 sigma^2/(N E_N Z^2))}.
// h_max = 1, Z = 1 is the equal-unit-gain case.
inline BoundPair hoeffding_bound(const DetectorConfig& cfg, double sigma2,
                                 double E_N, double h_max = 1.0) {
  BoundPair out;
  const double d0 = cfg.delta0();
  const double d1 = cfg.delta1();
  if (!(d0 > 0.0) || !(d1 > 0.0)) {
    out.vacuous = true;
    return out;
  }
  const double N = cfg.N();
  const double denom = h_max * h_max * cfg.mean_square_amplitude() +
                       4.0 * sigma2 / (N * E_N * cfg.Z() * cfg.Z());
  out.h0 = std::exp(-N * 2.0 * d0 * d0 / denom);
  out.h1 = std::exp(-N * 2.0 * d1 * d1 / denom);
  return out;
}

// Chernoff-type bound for i.i.d. profiles and equal unit gains:
//   exp{-N [D(p0 + Delta0/A || p0) - eps0(N)]},
//   exp{-N [D(p1 - Delta1/A || p1) - eps1(N)]},
// with the noise corrections
//   eps0(N) = sigma^2/(2 N A^2 E_N) log^2(1 + (Delta0/A)/(p0 (1-p0-Delta0/A)))
//   eps1(N) = sigma^2/(2 N A^2 E_N) log^2(1 + (Delta1/A)/((p1-Delta1/A)(1-p1))).
// Values are clamped to [0, 1].
inline BoundPair chernoff_bound_iid(const DetectorConfig& cfg, double sigma2,
                                    double E_N) {
  for (const SensorProfile& s : cfg.profiles()) {
    const SensorProfile& first = cfg.profiles().front();
    if (s.p0 != first.p0 || s.p1 != first.p1) {
      throw std::invalid_argument("chernoff_bound_iid requires i.i.d. profiles");
    }
  }
  BoundPair out;
  const double d0 = cfg.delta0();
  const double d1 = cfg.delta1();
  if (!(d0 > 0.0) || !(d1 > 0.0)) {
    out.vacuous = true;
    return out;
  }
  const SensorProfile& s = cfg.profiles().front();
  const double A = s.amplitude;
  const double N = cfg.N();
  // With no noise correction and unit prior ratio both exponents reduce to
  // the explicit asymptotic exponent; evaluating them once keeps that
  // coincidence exact in floating point.
  if (sigma2 == 0.0 && std::log(cfg.eta()) == 0.0) {
    const double exponent = asymptotic_exponent_iid(s.p0, s.p1);
    out.h0 = out.h1 = std::exp(-N * exponent);
    return out;
  }
  const double shift0 = s.p0 + d0 / A;
  const double shift1 = s.p1 - d1 / A;
  if (!(shift0 > 0.0 && shift0 < 1.0 && shift1 > 0.0 && shift1 < 1.0)) {
    throw std::domain_error("chernoff_bound_iid: shifted argument outside (0,1)");
  }
  const double noise = sigma2 / (2.0 * N * A * A * E_N);
  const double eps0 =
      noise * std::pow(std::log(1.0 + (d0 / A) / (s.p0 * (1.0 - shift0))), 2);
  const double eps1 =
      noise * std::pow(std::log(1.0 + (d1 / A) / (shift1 * (1.0 - s.p1))), 2);
  out.h0 = std::min(1.0, std::exp(-N * (kl_bernoulli(shift0, s.p0) - eps0)));
  out.h1 = std::min(1.0, std::exp(-N * (kl_bernoulli(shift1, s.p1) - eps1)));
  return out;
}

// ============================================================================
// Fenchel-Legendre transform
// ============================================================================

using LogMgf = std::function<double(double)>;

struct LegendreResult {
  double value = 0.0;
  double argsup = 0.0;
};

struct LegendreOptions {
  double t_abs_max = 50.0;  // working interval for t
  double tol = 1e-10;
  double diff_step = 1e-6;  // central-difference step scale for Lambda'
};

namespace detail {

inline double central_diff(const LogMgf& lambda, double t, double step_scale) {
  const double h = step_scale * (1.0 + std::abs(t));
  return (lambda(t + h) - lambda(t - h)) / (2.0 * h);
}

// Largest |t| <= t_abs_max (of the given sign) where Lambda is finite in a
// neighborhood wide enough for the central difference.
inline double shrink_to_finite(const LogMgf& lambda, double t,
                               double step_scale) {
  for (int i = 0; i < 400; ++i) {
    const double h = step_scale * (1.0 + std::abs(t));
    const double a = lambda(t);
    const double b = lambda(t + h);
    const double c = lambda(t - h);
    if (std::isfinite(a) && std::isfinite(b) && std::isfinite(c)) return t;
    t *= 0.85;
  }
  return 0.0;
}

}  // namespace detail

// sup_t (x t - Lambda(t)) for convex Lambda with Lambda(0) = 0. The optimizer
// solves Lambda'(t) = x on a working interval (shrunk when Lambda overflows),
// with Lambda' by central differences, bracket expansion, then bisection.
// Throws NumericalError when x is outside the closure of the range of
// Lambda' over the working interval.
inline LegendreResult legendre_transform(const LogMgf& lambda, double x,
                                         const LegendreOptions& opts = {}) {
  const double t_hi = detail::shrink_to_finite(lambda, opts.t_abs_max,
                                               opts.diff_step);
  const double t_lo = detail::shrink_to_finite(lambda, -opts.t_abs_max,
                                               opts.diff_step);
  auto slope = [&](double t) {
    return detail::central_diff(lambda, t, opts.diff_step);
  };
  // Expand a bracket for Lambda'(t) = x.
  double lo = std::max(t_lo, -1.0);
  double hi = std::min(t_hi, 1.0);
  for (int i = 0; i < 80 && slope(hi) < x && hi < t_hi; ++i) {
    hi = std::min(t_hi, hi * 2.0 + 0.5);
  }
  for (int i = 0; i < 80 && slope(lo) > x && lo > t_lo; ++i) {
    lo = std::max(t_lo, lo * 2.0 - 0.5);
  }
  const double margin = 1e-9 * (1.0 + std::abs(x));
  if (slope(hi) < x - margin || slope(lo) > x + margin) {
    throw NumericalError(
        "legendre_transform: x outside the range of Lambda' on the working "
        "interval (unbounded supremum)");
  }
  double t = 0.5 * (lo + hi);
  for (int i = 0; i < 200 && (hi - lo) > opts.tol * (1.0 + std::abs(t)); ++i) {
    t = 0.5 * (lo + hi);
    if (slope(t) < x) {
      lo = t;
    } else {
      hi = t;
    }
  }
  t = 0.5 * (lo + hi);
  double value = x * t - lambda(t);
  if (value < 0.0 && value > -1e-10) value = 0.0;  // roundoff at the mean
  return {value, t};
}

// log E[e^{t B}] for B ~ Bernoulli(p), stable for large |t|.
inline double log_mgf_bernoulli(double p, double t) {
  if (t > 30.0) return t + std::log(p + (1.0 - p) * std::exp(-t));
  return std::log(p * std::exp(t) + (1.0 - p));
}

// ============================================================================
// Asymptotic exponents
// ============================================================================

// Explicit i.i.d. equal-gain error exponent
//   D(p0 + D(p0||p1)/A || p0) = D(p1 - D(p1||p0)/A || p1);
// both routes are evaluated and must agree to 1e-10.
inline double asymptotic_exponent_iid(double p0, double p1) {
  if (!(p0 > 0.0 && p0 < p1 && p1 < 1.0)) {
    throw std::domain_error("asymptotic_exponent_iid requires 0 < p0 < p1 < 1");
  }
  const double A = amplification(p0, p1);
  const double via_h0 = kl_bernoulli(p0 + kl_bernoulli(p0, p1) / A, p0);
  const double via_h1 = kl_bernoulli(p1 - kl_bernoulli(p1, p0) / A, p1);
  if (std::abs(via_h0 - via_h1) > 1e-10) {
    throw NumericalError("asymptotic_exponent_iid: route identity violated");
  }
  return via_h0;
}

// ============================================================================
// Region sweep for the DC-in-AWGN model
// ============================================================================

struct RegionSweepRow {
  double x_lower = 0.0;
  double transmit_fraction = 0.0;
  double exponent = 0.0;
};

// One-sided-region sweep for detecting a DC level theta in AWGN:
// p0 = Q(X_L/sigma_v), p1 = Q((X_L-theta)/sigma_v), exponent from the
// explicit i.i.d. formula. Degenerate endpoints report exponent 0.
inline std::vector<RegionSweepRow> exponent_sweep_dc(
    double theta, double sigma_v2, std::span<const double> x_lower_grid,
    const Priors& priors = {}) {
  if (!(sigma_v2 > 0.0)) throw std::domain_error("sigma_v2 must be > 0");
  const double sd = std::sqrt(sigma_v2);
  std::vector<RegionSweepRow> rows;
  rows.reserve(x_lower_grid.size());
  for (double xl : x_lower_grid) {
    const double p0 = gaussian_q(xl / sd);
    const double p1 = gaussian_q((xl - theta) / sd);
    RegionSweepRow row;
    row.x_lower = xl;
    row.transmit_fraction = priors.h0 * p0 + priors.h1 * p1;
    const bool interior = p0 > kDegenerateProbEps &&
                          p1 < 1.0 - kDegenerateProbEps && p1 > p0;
    row.exponent = interior ? asymptotic_exponent_iid(p0, p1) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace seema
