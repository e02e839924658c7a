#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "seema/channel.hpp"
#include "seema/infotheory.hpp"
#include "seema/markov.hpp"
#include "seema/model.hpp"
#include "seema/rng.hpp"

namespace seema {

// ============================================================================
// Scenario description
// ============================================================================

enum class Scheme {
  Seema,
  TdmaNoisy,
  TdmaNoiseless,
  CountingNoiseless,
  LbmaNoisy,
  CvTsa,
  CopulaForward,
};

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Seema: return "seema";
    case Scheme::TdmaNoisy: return "tdma-noisy";
    case Scheme::TdmaNoiseless: return "tdma-noiseless";
    case Scheme::CountingNoiseless: return "counting-noiseless";
    case Scheme::LbmaNoisy: return "lbma-noisy";
    case Scheme::CvTsa: return "cv-tsa";
    case Scheme::CopulaForward: return "copula-forward";
  }
  return "?";
}

struct EnergyRule {
  enum class Kind { Constant, Power };
  Kind kind = Kind::Constant;
  double value = 1.0;  // E for constant, exponent c for E_N = N^c

  double per_transmission(int N) const {
    return kind == Kind::Constant ? value
                                  : std::pow(static_cast<double>(N), value);
  }
};

struct IidObservations {
  ScalarGaussianModel model = ScalarGaussianModel::gaussian_variance(1.0, 1.0);
};

// Independent non-identically distributed deployment: contiguous sensor
// blocks sized by the group weights, one scalar model per block, all groups
// sharing the scenario's transmission region.
struct GroupedObservations {
  std::vector<ModelGroup> groups;
};

// Binary Markov field observed directly; the transmission region is {1}.
struct MarkovObservations {
  MarkovField field;
};

using ObservationSpec =
    std::variant<IidObservations, GroupedObservations, MarkovObservations>;

struct Scenario {
  ObservationSpec observations;
  TransmissionRegion region;  // unused for Markov observations
  ChannelModel channel = ChannelModel::equal(1.0);
  NoiseSpec noise = NoiseSpec::gaussian(0.0);
  double eta = 1.0;
  std::optional<double> Z;  // empty: Z = mean channel gain
  EnergyRule energy;
  int N = 1;

  // MAP priors implied by eta = P(H0)/P(H1).
  double prior_h0() const { return eta / (1.0 + eta); }
  double prior_h1() const { return 1.0 / (1.0 + eta); }
};

// ============================================================================
// Resolved per-run context
// ============================================================================

namespace detail {

struct GroupContext {
  ScalarGaussianModel model;
  double weight = 1.0;
  int begin = 0;  // sensor index range [begin, end)
  int end = 0;
  double p0 = 0.0, p1 = 0.0, amplitude = 0.0;
  // Inverse-CDF cuts for indicator sampling: u > hi_cut or u < lo_cut means
  // the sampled observation lies in the region (lo_cut < 0 for one-sided).
  double lo_cut[2] = {-1.0, -1.0};
  double hi_cut[2] = {2.0, 2.0};
  bool general_region = false;
};

}  // namespace detail

// Everything derived from (Scenario, N) that trials need: per-sensor
// profiles, detector threshold, per-scheme constants.
class SimContext {
public:
  SimContext(const Scenario& scenario, int N)
      : scenario_(scenario), N_(N) {
    if (N < 1) throw std::invalid_argument("SimContext: N must be >= 1");
    Z_ = scenario.Z.value_or(choose_Z(scenario.channel));
    E_N_ = scenario.energy.per_transmission(N);
    if (!(E_N_ > 0.0)) throw std::invalid_argument("E_N must be > 0");

    if (const auto* iid = std::get_if<IidObservations>(&scenario.observations)) {
      add_group(iid->model, 1.0, 0, N, scenario.region);
    } else if (const auto* grouped =
                   std::get_if<GroupedObservations>(&scenario.observations)) {
      double cum = 0.0;
      int begin = 0;
      for (std::size_t g = 0; g < grouped->groups.size(); ++g) {
        cum += grouped->groups[g].first;
        int end = (g + 1 == grouped->groups.size())
                      ? N
                      : static_cast<int>(std::lround(cum * N));
        add_group(grouped->groups[g].second, grouped->groups[g].first, begin,
                  end, scenario.region);
        begin = end;
      }
    } else {
      const auto& field = std::get<MarkovObservations>(scenario.observations);
      field.field.validate();
      markov_ = field.field;
      detail::GroupContext gc{ScalarGaussianModel::gaussian_variance(1.0, 1.0)};
      gc.weight = 1.0;
      gc.begin = 0;
      gc.end = N;
      gc.p0 = field.field.h0.stationary_one_prob();
      gc.p1 = field.field.h1.stationary_one_prob();
      gc.amplitude = amplification(gc.p0, gc.p1);
      groups_.push_back(gc);
    }

    std::vector<SensorProfile> profiles;
    if (groups_.size() == 1) {
      profiles.push_back(SensorProfile::make(groups_[0].p0, groups_[0].p1,
                                             scenario.region));
    } else {
      profiles.reserve(N);
      for (int n = 0; n < N; ++n) {
        const detail::GroupContext& g = group_of(n);
        profiles.push_back(SensorProfile::make(g.p0, g.p1, scenario.region));
      }
    }
    detector_.emplace(scenario.eta, Z_, N, std::move(profiles));
    tau_ = detector_->threshold();
    mean_amplitude_ =
        weighted_mean([](const detail::GroupContext& g) { return g.amplitude; });
    count_threshold_ = N * tau_ / mean_amplitude_;
  }

  const Scenario& scenario() const { return scenario_; }
  int N() const { return N_; }
  double Z() const { return Z_; }
  double E_N() const { return E_N_; }
  double tau() const { return tau_; }
  const DetectorConfig& detector() const { return *detector_; }
  bool is_markov() const { return markov_.has_value(); }
  const MarkovField& markov_field() const { return *markov_; }
  const std::vector<detail::GroupContext>& groups() const { return groups_; }

  const detail::GroupContext& group_of(int sensor) const {
    for (const auto& g : groups_) {
      if (sensor < g.end) return g;
    }
    return groups_.back();
  }

  double count_threshold() const { return count_threshold_; }

  template <class F>
  double weighted_mean(F&& f) const {
    double sum = 0.0;
    for (const auto& g : groups_) sum += (g.end - g.begin) * f(g);
    return sum / N_;
  }

private:
  void add_group(const ScalarGaussianModel& model, double weight, int begin,
                 int end, const TransmissionRegion& region) {
    detail::GroupContext gc{model};
    gc.weight = weight;
    gc.begin = begin;
    gc.end = end;
    TransmissionProbs p = transmission_probs(region, model);
    gc.p0 = p.p0;
    gc.p1 = p.p1;
    gc.amplitude = amplification(p.p0, p.p1);
    if (const auto* one = std::get_if<OneSidedRegion>(&region)) {
      for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
        gc.lo_cut[hyp_index(h)] = -1.0;
        gc.hi_cut[hyp_index(h)] = model.cdf(one->x_lower, h);
      }
    } else if (const auto* two = std::get_if<TwoSidedRegion>(&region)) {
      for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
        gc.lo_cut[hyp_index(h)] = model.cdf(-two->x_lower, h);
        gc.hi_cut[hyp_index(h)] = model.cdf(two->x_lower, h);
      }
    } else {
      gc.general_region = true;
    }
    groups_.push_back(gc);
  }

  Scenario scenario_;
  int N_;
  double Z_ = 1.0;
  double E_N_ = 1.0;
  double tau_ = 0.0;
  double mean_amplitude_ = 0.0;
  double count_threshold_ = 0.0;
  std::vector<detail::GroupContext> groups_;
  std::optional<MarkovField> markov_;
  std::optional<DetectorConfig> detector_;
};

// ============================================================================
// Trials
// ============================================================================

struct TrialResult {
  Hypothesis decision = Hypothesis::H0;
  int transmit_count = 0;
  double energy = 0.0;
};

namespace detail {

// RNG roles; every draw is keyed by (seed, hypothesis, trial, role[, sensor]).
enum RngRole : std::uint64_t {
  kRoleObservation = 1,
  kRoleGain = 2,
  kRoleNoise = 3,
  kRoleSlotNoise = 4,
};

// Indicator of the sampled observation lying in the region, drawn through the
// observation's inverse CDF (one uniform per sensor).
inline bool draw_indicator(const GroupContext& g, Hypothesis hyp, Rng rng) {
  const double u = rng.uniform();
  const int i = hyp_index(hyp);
  return u < g.lo_cut[i] || u > g.hi_cut[i];
}

inline std::vector<std::uint8_t> draw_indicators(const SimContext& ctx,
                                                 Hypothesis hyp,
                                                 Rng& trial_rng) {
  std::vector<std::uint8_t> ind(static_cast<std::size_t>(ctx.N()));
  Rng obs = trial_rng.derive(kRoleObservation);
  if (ctx.is_markov()) {
    ind = sample_field(ctx.markov_field(), hyp, ctx.N(), obs);
    return ind;
  }
  for (int n = 0; n < ctx.N(); ++n) {
    const GroupContext& g = ctx.group_of(n);
    if (g.general_region) {
      Rng r = obs.derive(static_cast<std::uint64_t>(n));
      const double x = g.model.sample(hyp, r);
      ind[n] = region_contains(ctx.scenario().region, x) ? 1 : 0;
    } else {
      ind[n] = draw_indicator(g, hyp, obs.derive(static_cast<std::uint64_t>(n)))
                   ? 1
                   : 0;
    }
  }
  return ind;
}

// Log-likelihood ratio of a raw scalar observation (optionally with extra
// additive Gaussian variance from a noisy slot).
inline double scalar_llr(const ScalarGaussianModel& m, double x,
                         double extra_var) {
  const double v0 = m.variance(Hypothesis::H0) + extra_var;
  const double v1 = m.variance(Hypothesis::H1) + extra_var;
  const double d0 = x - m.mean(Hypothesis::H0);
  const double d1 = x - m.mean(Hypothesis::H1);
  return 0.5 * std::log(v0 / v1) + 0.5 * (d0 * d0 / v0 - d1 * d1 / v1);
}

}  // namespace detail

// One SEEMA data collection: sample observations, form indicators, superpose
// gain-scaled waveforms, add the normalized channel noise, threshold-test.
inline TrialResult run_seema_trial(const SimContext& ctx, Hypothesis truth,
                                   Rng trial_rng) {
  const auto ind = detail::draw_indicators(ctx, truth, trial_rng);
  Rng gains = trial_rng.derive(detail::kRoleGain);
  const ChannelModel& channel = ctx.scenario().channel;
  double sum = 0.0;
  double energy = 0.0;
  int count = 0;
  for (int n = 0; n < ctx.N(); ++n) {
    if (!ind[n]) continue;
    const auto& g = ctx.group_of(n);
    Rng r = gains.derive(static_cast<std::uint64_t>(n));
    sum += channel.sample(r) * g.amplitude;
    energy += ctx.E_N() * g.amplitude * g.amplitude;
    ++count;
  }
  Rng noise_rng = trial_rng.derive(detail::kRoleNoise);
  const double w = ctx.scenario().noise.sample(noise_rng);
  const double y =
      sum / ctx.N() + w / (ctx.N() * std::sqrt(ctx.E_N()));
  return {decide(y, ctx.detector()), count, energy};
}

inline TrialResult run_baseline_trial(Scheme scheme, const SimContext& ctx,
                                      Hypothesis truth, Rng trial_rng) {
  const Scenario& sc = ctx.scenario();
  const ChannelModel& channel = sc.channel;
  const double log_eta = std::log(sc.eta);
  TrialResult out;
  switch (scheme) {
    case Scheme::Seema:
      return run_seema_trial(ctx, truth, trial_rng);

    case Scheme::CountingNoiseless: {
      if (channel.kind() != ChannelModel::Kind::Equal) {
        throw std::invalid_argument("counting rule requires equal gains");
      }
      const auto ind = detail::draw_indicators(ctx, truth, trial_rng);
      int count = 0;
      for (auto b : ind) count += b;
      out.transmit_count = count;
      out.energy = 0.0;  // noiseless benchmark; count delivered for free
      out.decision = count > ctx.count_threshold() ? Hypothesis::H1
                                                   : Hypothesis::H0;
      return out;
    }

    case Scheme::TdmaNoisy:
    case Scheme::TdmaNoiseless: {
      if (ctx.is_markov()) {
        throw std::invalid_argument("tdma requires a scalar observation model");
      }
      const double sigma2 = scheme == Scheme::TdmaNoisy
                                ? sc.noise.variance_proxy()
                                : 0.0;
      Rng obs = trial_rng.derive(detail::kRoleObservation);
      Rng gains = trial_rng.derive(detail::kRoleGain);
      Rng slots = trial_rng.derive(detail::kRoleSlotNoise);
      double llr = 0.0;
      double energy = 0.0;
      for (int n = 0; n < ctx.N(); ++n) {
        const auto& g = ctx.group_of(n);
        Rng r = obs.derive(static_cast<std::uint64_t>(n));
        const double x = g.model.sample(truth, r);
        energy += ctx.E_N() * x * x;
        double extra_var = 0.0;
        double x_hat = x;
        if (sigma2 > 0.0) {
          Rng hr = gains.derive(static_cast<std::uint64_t>(n));
          const double h = channel.sample(hr);
          if (h == 0.0) continue;  // pure-noise slot carries no information
          extra_var = sigma2 / (h * h * ctx.E_N());
          Rng wr = slots.derive(static_cast<std::uint64_t>(n));
          x_hat = x + std::sqrt(extra_var) * wr.normal();
        }
        llr += detail::scalar_llr(g.model, x_hat, extra_var);
      }
      out.transmit_count = ctx.N();
      out.energy = energy;
      out.decision = llr > log_eta ? Hypothesis::H1 : Hypothesis::H0;
      return out;
    }

    case Scheme::LbmaNoisy: {
      Rng gains = trial_rng.derive(detail::kRoleGain);
      double received = 0.0;
      double energy = 0.0;
      const double sqrt_e = std::sqrt(ctx.E_N());
      if (ctx.is_markov()) {
        Rng obs = trial_rng.derive(detail::kRoleObservation);
        const auto ind = sample_field(ctx.markov_field(), truth, ctx.N(), obs);
        const auto& g = ctx.groups().front();
        const double l1 = std::log(g.p1 / g.p0);
        const double l0 = std::log((1.0 - g.p1) / (1.0 - g.p0));
        for (int n = 0; n < ctx.N(); ++n) {
          const double llr = ind[n] ? l1 : l0;
          Rng r = gains.derive(static_cast<std::uint64_t>(n));
          received += llr * channel.sample(r) * sqrt_e;
          energy += ctx.E_N() * llr * llr;
          out.transmit_count += 1;
        }
      } else {
        Rng obs = trial_rng.derive(detail::kRoleObservation);
        for (int n = 0; n < ctx.N(); ++n) {
          const auto& g = ctx.group_of(n);
          Rng r = obs.derive(static_cast<std::uint64_t>(n));
          const double x = g.model.sample(truth, r);
          const double llr = detail::scalar_llr(g.model, x, 0.0);
          Rng hr = gains.derive(static_cast<std::uint64_t>(n));
          received += llr * channel.sample(hr) * sqrt_e;
          energy += ctx.E_N() * llr * llr;
          out.transmit_count += 1;
        }
      }
      Rng noise_rng = trial_rng.derive(detail::kRoleNoise);
      received += sc.noise.sample(noise_rng);
      out.energy = energy;
      out.decision = received / (sqrt_e * ctx.Z()) > log_eta ? Hypothesis::H1
                                                             : Hypothesis::H0;
      return out;
    }

    case Scheme::CvTsa: {
      const auto ind = detail::draw_indicators(ctx, truth, trial_rng);
      Rng gains = trial_rng.derive(detail::kRoleGain);
      Rng slots = trial_rng.derive(detail::kRoleSlotNoise);
      const double sqrt_e = std::sqrt(ctx.E_N());
      const double mu_h = channel.mean();
      const double sigma = std::sqrt(sc.noise.variance_proxy());
      int fused = 0;
      for (int n = 0; n < ctx.N(); ++n) {
        const auto& g = ctx.group_of(n);
        double r = 0.0;
        if (ind[n]) {
          Rng hr = gains.derive(static_cast<std::uint64_t>(n));
          r += channel.sample(hr) * g.amplitude * sqrt_e;
          out.energy += ctx.E_N() * g.amplitude * g.amplitude;
          out.transmit_count += 1;
        }
        if (sigma > 0.0) {
          Rng wr = slots.derive(static_cast<std::uint64_t>(n));
          r += sigma * wr.normal();
        }
        // Second stage: re-threshold at half the mean received amplitude.
        if (r > 0.5 * sqrt_e * mu_h * g.amplitude) ++fused;
      }
      out.decision = fused > ctx.count_threshold() ? Hypothesis::H1
                                                   : Hypothesis::H0;
      return out;
    }

    case Scheme::CopulaForward: {
      if (!ctx.is_markov()) {
        throw std::invalid_argument("copula-forward requires a markov model");
      }
      Rng obs = trial_rng.derive(detail::kRoleObservation);
      const auto ind = sample_field(ctx.markov_field(), truth, ctx.N(), obs);
      const MarkovField& field = ctx.markov_field();
      auto chain_loglik = [&](const MarkovChainParams& c) {
        double ll;
        if (field.initial_state) {
          const double p1 = *field.initial_state == 0 ? 1.0 - c.alpha : c.beta;
          ll = std::log(ind[0] ? p1 : 1.0 - p1);
        } else {
          const double p1 = c.stationary_one_prob();
          ll = std::log(ind[0] ? p1 : 1.0 - p1);
        }
        for (int n = 1; n < ctx.N(); ++n) {
          const double p1 = ind[n - 1] ? c.beta : 1.0 - c.alpha;
          ll += std::log(ind[n] ? p1 : 1.0 - p1);
        }
        return ll;
      };
      const double llr = chain_loglik(field.h1) - chain_loglik(field.h0);
      for (auto b : ind) {
        out.transmit_count += b;
        out.energy += ctx.E_N() * (b ? 1.0 : 0.0);
      }
      out.decision = llr > log_eta ? Hypothesis::H1 : Hypothesis::H0;
      return out;
    }
  }
  throw std::invalid_argument("unknown scheme");
}

// ============================================================================
// Monte Carlo estimation
// ============================================================================

struct MCResult {
  long trials_per_hypothesis = 0;
  long errors_h0 = 0;
  long errors_h1 = 0;
  double pe = 0.0;    // prior-weighted error probability
  double ci95 = 0.0;  // half-width
  std::uint64_t seed = 0;
  double pe_h0 = 0.0, pe_h1 = 0.0;
  double ci_h0 = 0.0, ci_h1 = 0.0;
  double transmit_fraction = 0.0;  // prior-weighted mean transmit count / N
  double avg_energy = 0.0;         // prior-weighted mean per-trial energy
};

namespace detail {

// 95% half-width: normal approximation, Wilson when the error or success
// count is below 20.
inline double ci95_halfwidth(long errors, long n) {
  constexpr double z = 1.959963984540054;
  const double p = static_cast<double>(errors) / n;
  if (errors >= 20 && n - errors >= 20) {
    return z * std::sqrt(p * (1.0 - p) / n);
  }
  const double z2n = z * z / n;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
  return half;
}

struct BlockTotals {
  long errors = 0;
  long transmit = 0;
  double energy = 0.0;
};

// Runs trials in fixed-size blocks claimed by a worker pool, then folds block
// totals in index order, so results do not depend on the thread count.
template <class TrialFn>
inline BlockTotals run_blocks(long trials, int threads, TrialFn&& fn) {
  constexpr long kBlock = 4096;
  const long n_blocks = (trials + kBlock - 1) / kBlock;
  std::vector<BlockTotals> partial(static_cast<std::size_t>(n_blocks));
  std::atomic<long> next{0};
  auto worker = [&]() {
    for (;;) {
      const long b = next.fetch_add(1);
      if (b >= n_blocks) return;
      BlockTotals acc;
      const long begin = b * kBlock;
      const long end = std::min(trials, begin + kBlock);
      for (long trial = begin; trial < end; ++trial) {
        const auto r = fn(trial);
        acc.errors += r.decision_error;
        acc.transmit += r.transmit_count;
        acc.energy += r.energy;
      }
      partial[static_cast<std::size_t>(b)] = acc;
    }
  };
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  BlockTotals total;
  for (const BlockTotals& p : partial) {
    total.errors += p.errors;
    total.transmit += p.transmit;
    total.energy += p.energy;
  }
  return total;
}

}  // namespace detail

inline Rng make_trial_rng(std::uint64_t seed, Hypothesis hyp, long trial) {
  return Rng(seed)
      .derive(static_cast<std::uint64_t>(hyp_index(hyp)) + 0x11)
      .derive(static_cast<std::uint64_t>(trial));
}

// Runs trials_per_hypothesis seeded trials under each hypothesis and
// aggregates the prior-weighted error probability. Deterministic per seed and
// independent of the thread count.
inline MCResult estimate_error(const SimContext& ctx, Scheme scheme,
                               long trials_per_hypothesis, std::uint64_t seed,
                               int threads = 0) {
  if (trials_per_hypothesis < 1) {
    throw std::invalid_argument("estimate_error: trials must be >= 1");
  }
  MCResult res;
  res.trials_per_hypothesis = trials_per_hypothesis;
  res.seed = seed;
  const double w0 = ctx.scenario().prior_h0();
  const double w1 = ctx.scenario().prior_h1();
  double mean_energy[2];
  double mean_count[2];
  for (Hypothesis hyp : {Hypothesis::H0, Hypothesis::H1}) {
    auto per_trial = [&](long trial) {
      Rng trial_rng = make_trial_rng(seed, hyp, trial);
      TrialResult r = scheme == Scheme::Seema
                          ? run_seema_trial(ctx, hyp, trial_rng)
                          : run_baseline_trial(scheme, ctx, hyp, trial_rng);
      struct {
        int decision_error;
        int transmit_count;
        double energy;
      } flat{r.decision != hyp ? 1 : 0, r.transmit_count, r.energy};
      return flat;
    };
    const auto totals =
        detail::run_blocks(trials_per_hypothesis, threads, per_trial);
    const int i = hyp_index(hyp);
    (i == 0 ? res.errors_h0 : res.errors_h1) = totals.errors;
    mean_energy[i] = totals.energy / trials_per_hypothesis;
    mean_count[i] = static_cast<double>(totals.transmit) / trials_per_hypothesis;
  }
  res.pe_h0 = static_cast<double>(res.errors_h0) / trials_per_hypothesis;
  res.pe_h1 = static_cast<double>(res.errors_h1) / trials_per_hypothesis;
  res.ci_h0 = detail::ci95_halfwidth(res.errors_h0, trials_per_hypothesis);
  res.ci_h1 = detail::ci95_halfwidth(res.errors_h1, trials_per_hypothesis);
  res.pe = w0 * res.pe_h0 + w1 * res.pe_h1;
  res.ci95 = std::sqrt(w0 * w0 * res.ci_h0 * res.ci_h0 +
                       w1 * w1 * res.ci_h1 * res.ci_h1);
  res.transmit_fraction =
      (w0 * mean_count[0] + w1 * mean_count[1]) / ctx.N();
  res.avg_energy = w0 * mean_energy[0] + w1 * mean_energy[1];
  return res;
}

inline MCResult estimate_error(const Scenario& scenario, Scheme scheme,
                               long trials_per_hypothesis, std::uint64_t seed,
                               int threads = 0) {
  SimContext ctx(scenario, scenario.N);
  return estimate_error(ctx, scheme, trials_per_hypothesis, seed, threads);
}

}  // namespace seema
