#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "seema/numerics.hpp"
#include "seema/rng.hpp"

namespace seema {

enum class Hypothesis { H0 = 0, H1 = 1 };

inline int hyp_index(Hypothesis h) { return h == Hypothesis::H0 ? 0 : 1; }

// ============================================================================
// Observation models
// ============================================================================

// Scalar Gaussian observation models:
//   dc-in-awgn:        H0: N(0, sigma_v^2)   H1: N(theta, sigma_v^2)
//   gaussian-variance: H0: N(0, sigma_v^2)   H1: N(0, sigma_theta^2 + sigma_v^2)
class ScalarGaussianModel {
public:
  enum class Kind { DcInAwgn, GaussianVariance };

  static ScalarGaussianModel dc_in_awgn(double theta, double sigma_v2) {
    check_noise(sigma_v2);
    return ScalarGaussianModel(Kind::DcInAwgn, theta, sigma_v2);
  }

  static ScalarGaussianModel gaussian_variance(double sigma_theta2,
                                               double sigma_v2) {
    check_noise(sigma_v2);
    if (sigma_theta2 < 0.0) {
      throw std::invalid_argument("signal variance must be >= 0");
    }
    return ScalarGaussianModel(Kind::GaussianVariance, sigma_theta2, sigma_v2);
  }

  Kind kind() const { return kind_; }
  double noise_variance() const { return sigma_v2_; }
  double signal_param() const { return param_; }

  double mean(Hypothesis h) const {
    return (kind_ == Kind::DcInAwgn && h == Hypothesis::H1) ? param_ : 0.0;
  }

  double variance(Hypothesis h) const {
    return (kind_ == Kind::GaussianVariance && h == Hypothesis::H1)
               ? sigma_v2_ + param_
               : sigma_v2_;
  }

  double stddev(Hypothesis h) const { return std::sqrt(variance(h)); }

  double density(double x, Hypothesis h) const {
    const double s2 = variance(h);
    const double d = x - mean(h);
    return std::exp(-0.5 * d * d / s2) / std::sqrt(2.0 * kPi * s2);
  }

  double cdf(double x, Hypothesis h) const {
    return 0.5 * std::erfc(-(x - mean(h)) / (stddev(h) * kSqrt2));
  }

  double sample(Hypothesis h, Rng& rng) const {
    return mean(h) + stddev(h) * rng.normal();
  }

private:
  ScalarGaussianModel(Kind kind, double param, double sigma_v2)
      : kind_(kind), param_(param), sigma_v2_(sigma_v2) {}

  static void check_noise(double sigma_v2) {
    if (!(sigma_v2 > 0.0)) {
      throw std::invalid_argument("observation noise variance must be > 0");
    }
  }

  Kind kind_;
  double param_;
  double sigma_v2_;
};

// Weighted mixture of per-group models sharing one transmission region
// (independent, non-identically distributed deployments).
using ModelGroup = std::pair<double, ScalarGaussianModel>;

// ============================================================================
// Transmission regions
// ============================================================================

struct OneSidedRegion {
  double x_lower;  // x in Gamma  <=>  x > x_lower
  bool contains(double x) const { return x > x_lower; }
};

struct TwoSidedRegion {
  double x_lower;  // x in Gamma  <=>  |x| > x_lower, x_lower >= 0
  bool contains(double x) const { return std::abs(x) > x_lower; }
};

// Arbitrary region given by an indicator over the observation vector plus a
// bounding-box integration hint. dim == 1 integrates by adaptive quadrature;
// dim > 1 by randomly-shifted Halton QMC with a reported standard error.
struct GeneralRegion {
  std::function<bool(std::span<const double>)> indicator;
  std::vector<double> box_lo;
  std::vector<double> box_hi;

  std::size_t dim() const { return box_lo.size(); }
  bool contains(double x) const {
    const double v[1] = {x};
    return indicator(std::span<const double>(v, 1));
  }
};

using TransmissionRegion =
    std::variant<OneSidedRegion, TwoSidedRegion, GeneralRegion>;

inline bool region_contains(const TransmissionRegion& region, double x) {
  return std::visit([x](const auto& r) { return r.contains(x); }, region);
}

// ============================================================================
// Transmission probabilities
// ============================================================================

struct TransmissionProbs {
  double p0 = 0.0;
  double p1 = 0.0;
  // Standard errors of the QMC estimate; zero for exact evaluations.
  double se0 = 0.0;
  double se1 = 0.0;
};

// Thrown when a region yields a transmit probability outside
// (1e-12, 1 - 1e-12) under either hypothesis; carries the computed values.
class DegenerateRegionError : public std::domain_error {
public:
  DegenerateRegionError(double p0, double p1)
      : std::domain_error("transmission region is degenerate: p0 = " +
                          std::to_string(p0) + ", p1 = " + std::to_string(p1)),
        p0_(p0),
        p1_(p1) {}
  double p0() const { return p0_; }
  double p1() const { return p1_; }

private:
  double p0_, p1_;
};

inline constexpr double kDegenerateProbEps = 1e-12;

namespace detail {

inline double gaussian_region_prob(const OneSidedRegion& r,
                                   const ScalarGaussianModel& m,
                                   Hypothesis h) {
  return gaussian_q((r.x_lower - m.mean(h)) / m.stddev(h));
}

inline double gaussian_region_prob(const TwoSidedRegion& r,
                                   const ScalarGaussianModel& m,
                                   Hypothesis h) {
  const double mu = m.mean(h);
  const double sd = m.stddev(h);
  if (mu == 0.0) return gaussian_two_sided_tail(r.x_lower, sd);
  return gaussian_q((r.x_lower - mu) / sd) + gaussian_q((r.x_lower + mu) / sd);
}

// P(x in region) for a general region: 1-D adaptive quadrature over the box
// hint; multi-D randomized QMC over the box with a product density.
inline std::pair<double, double> general_region_prob(
    const GeneralRegion& r, const ScalarGaussianModel& m, Hypothesis h,
    std::uint64_t qmc_seed) {
  if (r.box_lo.size() != r.box_hi.size() || r.box_lo.empty()) {
    throw std::invalid_argument("general region: invalid bounding box");
  }
  const std::size_t d = r.dim();
  if (d == 1) {
    auto f = [&](double x) {
      const double v[1] = {x};
      return r.indicator(std::span<const double>(v, 1)) ? m.density(x, h) : 0.0;
    };
    return {integrate(f, r.box_lo[0], r.box_hi[0], 1e-10), 0.0};
  }
  // Components are i.i.d. copies of the scalar model under each hypothesis.
  static constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  if (d > std::size(kPrimes)) {
    throw std::invalid_argument("general region: dimension too large");
  }
  constexpr int kShifts = 8;
  constexpr unsigned long long kPoints = 8192;
  double volume = 1.0;
  for (std::size_t j = 0; j < d; ++j) volume *= r.box_hi[j] - r.box_lo[j];
  Rng shift_rng(qmc_seed);
  double shift[std::size(kPrimes)];
  std::vector<double> x(d);
  double batch_means[kShifts];
  for (int s = 0; s < kShifts; ++s) {
    for (std::size_t j = 0; j < d; ++j) shift[j] = shift_rng.uniform();
    double acc = 0.0;
    for (unsigned long long i = 1; i <= kPoints; ++i) {
      double dens = 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        double u = halton(i, kPrimes[j]) + shift[j];
        if (u >= 1.0) u -= 1.0;
        x[j] = r.box_lo[j] + u * (r.box_hi[j] - r.box_lo[j]);
        dens *= m.density(x[j], h);
      }
      if (r.indicator(std::span<const double>(x.data(), d))) acc += dens;
    }
    batch_means[s] = volume * acc / static_cast<double>(kPoints);
  }
  double mean = 0.0;
  for (double b : batch_means) mean += b;
  mean /= kShifts;
  double var = 0.0;
  for (double b : batch_means) var += (b - mean) * (b - mean);
  var /= (kShifts - 1);
  return {mean, std::sqrt(var / kShifts)};
}

}  // namespace detail

// Transmit probabilities (p0, p1) of a region without the degeneracy check.
// Used by calibration sweeps that legitimately pass through extreme regions.
inline TransmissionProbs transmission_probs_unchecked(
    const TransmissionRegion& region, const ScalarGaussianModel& model,
    std::uint64_t qmc_seed = 0x5EE347A1) {
  TransmissionProbs out;
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    double p = 0.0, se = 0.0;
    if (const auto* one = std::get_if<OneSidedRegion>(&region)) {
      p = detail::gaussian_region_prob(*one, model, h);
    } else if (const auto* two = std::get_if<TwoSidedRegion>(&region)) {
      p = detail::gaussian_region_prob(*two, model, h);
    } else {
      auto [pp, ss] = detail::general_region_prob(
          std::get<GeneralRegion>(region), model, h, qmc_seed);
      p = pp;
      se = ss;
    }
    if (h == Hypothesis::H0) {
      out.p0 = p;
      out.se0 = se;
    } else {
      out.p1 = p;
      out.se1 = se;
    }
  }
  return out;
}

// Transmit probabilities of a region; throws DegenerateRegionError when
// either probability leaves (1e-12, 1 - 1e-12).
inline TransmissionProbs transmission_probs(
    const TransmissionRegion& region, const ScalarGaussianModel& model,
    std::uint64_t qmc_seed = 0x5EE347A1) {
  TransmissionProbs p = transmission_probs_unchecked(region, model, qmc_seed);
  for (double v : {p.p0, p.p1}) {
    if (!(v > kDegenerateProbEps && v < 1.0 - kDegenerateProbEps)) {
      throw DegenerateRegionError(p.p0, p.p1);
    }
  }
  return p;
}

// ============================================================================
// Sensor profiles
// ============================================================================

// Amplification log((1-p0) p1 / ((1-p1) p0)); positive iff p1 > p0.
inline double amplification(double p0, double p1) {
  if (!(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0)) {
    throw std::domain_error("amplification requires p0, p1 in (0, 1)");
  }
  return std::log((1.0 - p0) * p1 / ((1.0 - p1) * p0));
}

struct SensorProfile {
  double p0;
  double p1;
  double amplitude;  // A = log((1-p0) p1 / ((1-p1) p0))
  TransmissionRegion region;

  static SensorProfile make(double p0, double p1, TransmissionRegion region) {
    if (!(p1 > p0)) {
      throw std::invalid_argument(
          "sensor profile requires p1 > p0 (transmit more likely under H1)");
    }
    return SensorProfile{p0, p1, amplification(p0, p1), std::move(region)};
  }

  static SensorProfile from_region(const TransmissionRegion& region,
                                   const ScalarGaussianModel& model) {
    TransmissionProbs p = transmission_probs(region, model);
    return make(p.p0, p.p1, region);
  }
};

// ============================================================================
// Region calibration
// ============================================================================

struct Priors {
  double h0 = 0.5;
  double h1 = 0.5;
};

class CalibrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class RegionShape { OneSided, TwoSided };

inline TransmissionRegion make_threshold_region(RegionShape shape,
                                                double x_lower) {
  if (shape == RegionShape::OneSided) return OneSidedRegion{x_lower};
  return TwoSidedRegion{x_lower};
}

// Prior-weighted expected transmit fraction at threshold x_lower, averaged
// over the deployment groups.
inline double expected_transmit_fraction(std::span<const ModelGroup> groups,
                                         const Priors& priors,
                                         RegionShape shape, double x_lower) {
  double total = 0.0;
  for (const auto& [weight, model] : groups) {
    TransmissionProbs p = transmission_probs_unchecked(
        make_threshold_region(shape, x_lower), model);
    total += weight * (priors.h0 * p.p0 + priors.h1 * p.p1);
  }
  return total;
}

// Finds x_lower such that the prior-weighted transmit fraction hits
// target_fraction within 1e-8, by bisection on a bracketing interval.
inline TransmissionRegion calibrate_region(std::span<const ModelGroup> groups,
                                           const Priors& priors,
                                           double target_fraction,
                                           RegionShape shape,
                                           double tol = 1e-8) {
  if (groups.empty()) throw CalibrationError("calibrate_region: no groups");
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    throw CalibrationError("calibrate_region: target_fraction must be in (0,1)");
  }
  double scale = 0.0;
  for (const auto& [w, m] : groups) {
    scale = std::max({scale, m.stddev(Hypothesis::H0), m.stddev(Hypothesis::H1),
                      std::abs(m.mean(Hypothesis::H1))});
  }
  auto fraction = [&](double x) {
    return expected_transmit_fraction(groups, priors, shape, x);
  };
  // The fraction is nonincreasing in x_lower for both shapes.
  double lo = (shape == RegionShape::TwoSided) ? 0.0 : -60.0 * scale;
  double hi = 60.0 * scale;
  if (fraction(lo) < target_fraction || fraction(hi) > target_fraction) {
    throw CalibrationError(
        "calibrate_region: target fraction unreachable for this shape");
  }
  auto f = [&](double x) { return fraction(x) - target_fraction; };
  double x_lower = bisect_root(f, lo, hi, 1e-14 * (1.0 + scale), 300);
  if (std::abs(f(x_lower)) > tol) {
    throw CalibrationError("calibrate_region: bisection did not converge");
  }
  return make_threshold_region(shape, x_lower);
}

inline TransmissionRegion calibrate_region(const ScalarGaussianModel& model,
                                           const Priors& priors,
                                           double target_fraction,
                                           RegionShape shape,
                                           double tol = 1e-8) {
  const ModelGroup group{1.0, model};
  return calibrate_region(std::span<const ModelGroup>(&group, 1), priors,
                          target_fraction, shape, tol);
}

}  // namespace seema
