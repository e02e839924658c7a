#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "seema/infotheory.hpp"
#include "seema/numerics.hpp"
#include "seema/rng.hpp"

namespace seema {

// ============================================================================
// Rayleigh MGF
// ============================================================================

// E[e^{t A_k h}] for h Rayleigh with received power P_r = E[h^2]
// (density (2h/P_r) e^{-h^2/P_r}, h >= 0). With a = t A_k sqrt(P_r):
//   M(t) = 1 + (sqrt(pi)/2) a e^{a^2/4} (1 + erf(a/2)),
// evaluated through erfcx for a < 0 to avoid cancellation. Returns +inf when
// the positive branch overflows; validated against the quadrature oracle in
// the test suite.
inline double rayleigh_mgf(double t, double received_power, double A_k) {
  if (!(received_power > 0.0)) {
    throw std::domain_error("rayleigh_mgf: received power must be > 0");
  }
  if (A_k == 0.0) throw std::domain_error("rayleigh_mgf: A_k must be nonzero");
  const double a = t * A_k * std::sqrt(received_power);
  const double u = 0.5 * a;
  if (a >= 0.0) {
    if (u * u > 700.0) return std::numeric_limits<double>::infinity();
    return 1.0 + kSqrtPi * u * std::exp(u * u) * (1.0 + std::erf(u));
  }
  return 1.0 - kSqrtPi * (-u) * erfcx_nonneg(-u);
}

// ============================================================================
// Channel models
// ============================================================================

// Fading-gain model: degenerate equal gain, Rayleigh, or ON/OFF. All kinds
// have positive mean (phases are assumed corrected, gains real nonnegative).
// h_max is present only for bounded-support kinds.
class ChannelModel {
public:
  enum class Kind { Equal, Rayleigh, OnOff };

  static ChannelModel equal(double gain) {
    if (!(gain > 0.0)) throw std::invalid_argument("equal gain must be > 0");
    return ChannelModel(Kind::Equal, gain, 0.0);
  }

  static ChannelModel rayleigh(double received_power) {
    if (!(received_power > 0.0)) {
      throw std::invalid_argument("rayleigh received power must be > 0");
    }
    return ChannelModel(Kind::Rayleigh, received_power, 0.0);
  }

  static ChannelModel on_off(double p_on, double gain) {
    if (!(p_on > 0.0 && p_on <= 1.0)) {
      throw std::invalid_argument("on-off probability must be in (0, 1]");
    }
    if (!(gain > 0.0)) throw std::invalid_argument("on-off gain must be > 0");
    return ChannelModel(Kind::OnOff, p_on, gain);
  }

  Kind kind() const { return kind_; }
  double param() const { return a_; }
  double gain() const { return kind_ == Kind::OnOff ? b_ : a_; }

  double mean() const {
    switch (kind_) {
      case Kind::Equal:
        return a_;
      case Kind::Rayleigh:
        return 0.5 * kSqrtPi * std::sqrt(a_);
      case Kind::OnOff:
        return a_ * b_;
    }
    return 0.0;
  }

  // E[e^{t h}]; equals 1 at t = 0 for every kind.
  double mgf(double t) const {
    switch (kind_) {
      case Kind::Equal:
        return std::exp(t * a_);
      case Kind::Rayleigh:
        return t == 0.0 ? 1.0 : rayleigh_mgf(t, a_, 1.0);
      case Kind::OnOff:
        return a_ * std::exp(t * b_) + (1.0 - a_);
    }
    return 1.0;
  }

  // Support bound; absent for Rayleigh (unbounded), in which case the
  // bounded-gain finite-sample bounds are unavailable.
  std::optional<double> h_max() const {
    switch (kind_) {
      case Kind::Equal:
        return a_;
      case Kind::Rayleigh:
        return std::nullopt;
      case Kind::OnOff:
        return b_;
    }
    return std::nullopt;
  }

  double sample(Rng& rng) const {
    switch (kind_) {
      case Kind::Equal:
        return a_;
      case Kind::Rayleigh:
        return rng.rayleigh(a_);
      case Kind::OnOff:
        return rng.uniform() < a_ ? b_ : 0.0;
    }
    return 0.0;
  }

private:
  ChannelModel(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_;
  double a_;  // gain | received power | p_on
  double b_;  // on-off gain
};

// Receiver normalizer: the mean channel gain. For an equal-gain channel this
// is the gain itself (so unit channels normalize by 1).
inline double choose_Z(const ChannelModel& channel) { return channel.mean(); }

// ============================================================================
// Sub-Gaussian noise
// ============================================================================

// Zero-mean noise with variance proxy sigma^2: E[e^{sw}] <= e^{sigma^2 s^2/2}.
// Default is Gaussian; the alternative adds a bounded uniform interferer on
// [-a, a] (proxy a^2) to a Gaussian component.
class NoiseSpec {
public:
  static NoiseSpec gaussian(double sigma2) {
    if (sigma2 < 0.0) throw std::invalid_argument("noise variance must be >= 0");
    return NoiseSpec(sigma2, 0.0, sigma2);
  }

  static NoiseSpec bounded_plus_gaussian(double bound, double gaussian_var) {
    if (!(bound >= 0.0 && gaussian_var >= 0.0)) {
      throw std::invalid_argument("noise parameters must be >= 0");
    }
    return NoiseSpec(bound * bound + gaussian_var, bound, gaussian_var);
  }

  double variance_proxy() const { return proxy_; }

  double sample(Rng& rng) const {
    double w = 0.0;
    if (bound_ > 0.0) w += bound_ * (2.0 * rng.uniform() - 1.0);
    if (gaussian_var_ > 0.0) w += std::sqrt(gaussian_var_) * rng.normal();
    return w;
  }

private:
  NoiseSpec(double proxy, double bound, double gaussian_var)
      : proxy_(proxy), bound_(bound), gaussian_var_(gaussian_var) {}

  double proxy_;
  double bound_;
  double gaussian_var_;
};

// ============================================================================
// Detectability margins (Assumption A1)
// ============================================================================

struct A1Report {
  double delta0 = 0.0;  // tau - E[y/Z | H0] at the configured N
  double delta1 = 0.0;  // E[y/Z | H1] - tau
  std::optional<int> n0;  // smallest N with both margins positive, if found
};

// Computes the detectability margins from the channel mean, and scans N
// upward (cycling the profile pattern) for the smallest N0 with both
// positive. An empty n0 means the margins never both turn positive up to
// scan_cap.
inline A1Report verify_A1(const DetectorConfig& cfg,
                          const ChannelModel& channel, int scan_cap = 100000) {
  const double gain_ratio = channel.mean() / cfg.Z();
  A1Report report;
  report.delta0 =
      cfg.threshold() - gain_ratio * cfg.mean_amplitude(Hypothesis::H0);
  report.delta1 =
      gain_ratio * cfg.mean_amplitude(Hypothesis::H1) - cfg.threshold();

  const auto& profiles = cfg.profiles();
  const double log_eta = std::log(cfg.eta());
  double sum_log = 0.0, sum_p0a = 0.0, sum_p1a = 0.0;
  for (int n = 1; n <= scan_cap; ++n) {
    const SensorProfile& s = profiles[(n - 1) % profiles.size()];
    sum_log += std::log((1.0 - s.p0) / (1.0 - s.p1));
    sum_p0a += s.p0 * s.amplitude;
    sum_p1a += s.p1 * s.amplitude;
    const double tau_n = (log_eta + sum_log) / n;
    const double d0 = tau_n - gain_ratio * sum_p0a / n;
    const double d1 = gain_ratio * sum_p1a / n - tau_n;
    if (d0 > 0.0 && d1 > 0.0) {
      report.n0 = n;
      break;
    }
  }
  return report;
}

}  // namespace seema
