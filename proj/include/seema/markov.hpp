#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "seema/channel.hpp"
#include "seema/infotheory.hpp"
#include "seema/rng.hpp"

namespace seema {

// ============================================================================
// Spatial Gilbert-Elliott field over sensor indicators
// ============================================================================

// Two-state chain with transition matrix [[alpha, 1-alpha], [1-beta, beta]]:
// alpha = pi(0,0), beta = pi(1,1). Irreducibility requires both in (0, 1).
struct MarkovChainParams {
  double alpha;
  double beta;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0)) {
      throw std::invalid_argument(
          "markov chain: alpha, beta must be in (0, 1) for irreducibility");
    }
  }

  // Stationary probability of state 1: (1-alpha) / ((1-alpha) + (1-beta)).
  double stationary_one_prob() const {
    return (1.0 - alpha) / ((1.0 - alpha) + (1.0 - beta));
  }
};

struct MarkovField {
  MarkovChainParams h0;
  MarkovChainParams h1;
  // Virtual state preceding sensor 1; empty means a stationary start.
  std::optional<int> initial_state;

  const MarkovChainParams& chain(Hypothesis h) const {
    return h == Hypothesis::H0 ? h0 : h1;
  }

  void validate() const {
    h0.validate();
    h1.validate();
    if (initial_state && *initial_state != 0 && *initial_state != 1) {
      throw std::invalid_argument("markov field: initial state must be 0 or 1");
    }
  }
};

// Draws the indicator vector (1_Gamma(x_1), ..., 1_Gamma(x_N)) from the
// chain under the given hypothesis.
inline std::vector<std::uint8_t> sample_field(const MarkovField& field,
                                              Hypothesis hyp, int N,
                                              Rng& rng) {
  if (N < 1) throw std::invalid_argument("sample_field: N must be >= 1");
  const MarkovChainParams& c = field.chain(hyp);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(N));
  int state;
  if (field.initial_state) {
    // First indicator drawn from pi(s, .).
    const double p_one = (*field.initial_state == 0) ? 1.0 - c.alpha : c.beta;
    state = rng.uniform() < p_one ? 1 : 0;
  } else {
    state = rng.uniform() < c.stationary_one_prob() ? 1 : 0;
  }
  out[0] = static_cast<std::uint8_t>(state);
  for (int n = 1; n < N; ++n) {
    const double p_one = state == 0 ? 1.0 - c.alpha : c.beta;
    state = rng.uniform() < p_one ? 1 : 0;
    out[n] = static_cast<std::uint8_t>(state);
  }
  return out;
}

// ============================================================================
// Tilted matrix and Perron-Frobenius eigenvalue
// ============================================================================

struct Matrix2 {
  double a, b;  // row 0
  double c, d;  // row 1
};

// Pi_t = Pi diag(1, kappa) with kappa = E_h[e^{t h}]: state-1 columns pick up
// the channel MGF.
inline Matrix2 tilted_matrix(const MarkovField& field, Hypothesis hyp,
                             double t,
                             const std::function<double(double)>& channel_mgf) {
  const MarkovChainParams& ch = field.chain(hyp);
  const double kappa = channel_mgf(t);
  if (!std::isfinite(kappa)) {
    throw NumericalError("tilted_matrix: channel MGF overflow");
  }
  return Matrix2{ch.alpha, (1.0 - ch.alpha) * kappa, 1.0 - ch.beta,
                 ch.beta * kappa};
}

// Dominant eigenvalue of a nonnegative irreducible 2x2 matrix,
//   rho = (a+d)/2 + sqrt(((a-d)/2)^2 + bc).
// Exactly-stochastic matrices short-circuit to 1. Throws when an off-diagonal
// entry is 0 (reducible).
inline double perron_eigenvalue(const Matrix2& m) {
  if (m.a < 0.0 || m.b < 0.0 || m.c < 0.0 || m.d < 0.0) {
    throw std::domain_error("perron_eigenvalue: matrix must be nonnegative");
  }
  if (m.b == 0.0 || m.c == 0.0) {
    throw std::domain_error("perron_eigenvalue: matrix is reducible");
  }
  if (m.a + m.b == 1.0 && m.c + m.d == 1.0) return 1.0;
  const double half_diff = 0.5 * (m.a - m.d);
  return 0.5 * (m.a + m.d) + std::sqrt(half_diff * half_diff + m.b * m.c);
}

// Limiting log-MGF of the per-sensor indicator average (gains folded in via
// the channel MGF, normalized by Z): Lambda(t) = log rho(Pi_t).
inline double markov_log_mgf(const MarkovField& field, Hypothesis hyp,
                             const ChannelModel& channel, double t,
                             double Z = 1.0) {
  const MarkovChainParams& ch = field.chain(hyp);
  const double kappa = channel.mgf(t / Z);
  if (!std::isfinite(kappa)) return std::numeric_limits<double>::infinity();
  return std::log(perron_eigenvalue(Matrix2{
      ch.alpha, (1.0 - ch.alpha) * kappa, 1.0 - ch.beta, ch.beta * kappa}));
}

// Rate function I_i(x) of the indicator average under hypothesis i, from the
// Perron-Frobenius log-MGF.
inline LegendreResult markov_rate_function(const MarkovField& field,
                                           Hypothesis hyp,
                                           const ChannelModel& channel,
                                           double x, double Z = 1.0,
                                           const LegendreOptions& opts = {}) {
  field.chain(hyp).validate();
  return legendre_transform(
      [&](double t) { return markov_log_mgf(field, hyp, channel, t, Z); }, x,
      opts);
}

}  // namespace seema
