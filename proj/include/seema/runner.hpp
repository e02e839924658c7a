#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "seema/analysis.hpp"
#include "seema/scenario.hpp"

namespace seema {

// ============================================================================
// CSV helpers (floats serialized with 17 significant digits)
// ============================================================================

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
      out += header[i];
      out += (i + 1 == header.size()) ? '\n' : ',';
    }
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out += row[i];
        out += (i + 1 == row.size()) ? '\n' : ',';
      }
    }
    return out;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& row : rows) {
      json obj;
      for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = row[i];
      arr.push_back(obj);
    }
    return arr;
  }
};

// ============================================================================
// Run overrides (CLI flags)
// ============================================================================

struct RunOverrides {
  std::optional<long> trials;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

inline void apply_overrides(ScenarioFile& file, const RunOverrides& ov) {
  if (ov.trials) file.mc.trials = *ov.trials;
  if (ov.seed) file.mc.seed = *ov.seed;
}

// ============================================================================
// simulate
// ============================================================================

namespace detail {

inline std::vector<std::string> simulate_row(int N, Scheme scheme,
                                             const MCResult& mc) {
  return {std::to_string(N),          scheme_name(scheme),
          format_g17(mc.pe),          format_g17(mc.ci95),
          format_g17(mc.avg_energy),  format_g17(mc.transmit_fraction)};
}

// Smallest N on a doubling-style grid where the scheme's Pe drops to the
// target; used by the Pe_target sweep.
inline std::optional<std::pair<int, MCResult>> find_n_for_target(
    const ScenarioFile& file, Scheme scheme, double pe_target,
    const RunOverrides& ov, int n_cap = 4096) {
  int N = 8;
  while (N <= n_cap) {
    Scenario sc = file.scenario;
    sc.N = N;
    SimContext ctx(sc, N);
    MCResult mc = estimate_error(ctx, scheme, file.mc.trials, file.mc.seed,
                                 ov.threads);
    if (mc.pe <= pe_target) return std::make_pair(N, mc);
    N = std::max(N + 1, static_cast<int>(std::lround(N * 1.4)));
  }
  return std::nullopt;
}

}  // namespace detail

// Monte Carlo sweep. Grid variable N: fixed columns
// (N, scheme, Pe, ci95, avg_energy, transmit_fraction). X_L and Pe_target
// sweeps prepend the sweep value as the first column.
inline Table cmd_simulate(ScenarioFile file, const RunOverrides& ov = {}) {
  apply_overrides(file, ov);
  resolve_scenario(file);
  if (file.schemes.empty()) {
    throw ScenarioError("simulate: scheme list must be nonempty");
  }
  Table table;
  std::vector<double> grid = file.sweep.grid;
  std::sort(grid.begin(), grid.end());
  switch (file.sweep.variable) {
    case SweepSpec::Variable::N: {
      table.header = {"N", "scheme", "Pe", "ci95", "avg_energy",
                      "transmit_fraction"};
      for (double g : grid) {
        const int N = static_cast<int>(std::lround(g));
        Scenario sc = file.scenario;
        sc.N = N;
        SimContext ctx(sc, N);
        for (Scheme scheme : file.schemes) {
          const MCResult mc = estimate_error(ctx, scheme, file.mc.trials,
                                             file.mc.seed, ov.threads);
          table.rows.push_back(detail::simulate_row(N, scheme, mc));
        }
      }
      return table;
    }
    case SweepSpec::Variable::XLower: {
      table.header = {"X_L",  "N",          "scheme",
                      "Pe",   "ci95",       "avg_energy",
                      "transmit_fraction"};
      const int N = *file.sweep.N;
      for (double xl : grid) {
        Scenario sc = file.scenario;
        sc.region = make_threshold_region(file.region_shape, xl);
        sc.N = N;
        SimContext ctx(sc, N);
        for (Scheme scheme : file.schemes) {
          const MCResult mc = estimate_error(ctx, scheme, file.mc.trials,
                                             file.mc.seed, ov.threads);
          auto row = detail::simulate_row(N, scheme, mc);
          row.insert(row.begin(), format_g17(xl));
          table.rows.push_back(std::move(row));
        }
      }
      return table;
    }
    case SweepSpec::Variable::PeTarget: {
      table.header = {"pe_target", "N",          "scheme",
                      "Pe",        "ci95",       "avg_energy",
                      "transmit_fraction"};
      std::sort(grid.rbegin(), grid.rend());  // large targets first
      for (double target : grid) {
        for (Scheme scheme : file.schemes) {
          auto hit = detail::find_n_for_target(file, scheme, target, ov);
          if (!hit) {
            throw NumericalError("simulate: Pe target " + format_g17(target) +
                                 " unreachable for scheme " +
                                 scheme_name(scheme));
          }
          auto row = detail::simulate_row(hit->first, scheme, hit->second);
          row.insert(row.begin(), format_g17(target));
          table.rows.push_back(std::move(row));
        }
      }
      return table;
    }
  }
  throw ScenarioError("simulate: unsupported sweep");
}

// ============================================================================
// exponent
// ============================================================================

// Asymptotic error exponents through the matching analytical path.
inline Table cmd_exponent(ScenarioFile file, const RunOverrides& ov = {}) {
  apply_overrides(file, ov);
  resolve_scenario(file);
  SimContext ctx(file.scenario, file.scenario.N);
  const ExponentReport rep = analytic_exponents(ctx);
  Table table;
  table.header = {"hypothesis", "exponent", "argsup_t", "threshold", "method"};
  table.rows.push_back({"H0", format_g17(rep.exponent_h0),
                        format_g17(rep.argsup_h0), format_g17(rep.threshold),
                        rep.method});
  table.rows.push_back({"H1", format_g17(rep.exponent_h1),
                        format_g17(rep.argsup_h1), format_g17(rep.threshold),
                        rep.method});
  return table;
}

// ============================================================================
// sweep-region
// ============================================================================

// One-sided-region sweep for the DC-in-AWGN model (exponent and expected
// transmit fraction per X_L).
inline Table cmd_sweep_region(double theta, double sigma_v2,
                              std::span<const double> grid) {
  Table table;
  table.header = {"X_L", "transmit_fraction", "exponent"};
  for (const RegionSweepRow& row : exponent_sweep_dc(theta, sigma_v2, grid)) {
    table.rows.push_back({format_g17(row.x_lower),
                          format_g17(row.transmit_fraction),
                          format_g17(row.exponent)});
  }
  return table;
}

// ============================================================================
// bounds
// ============================================================================

// Finite-sample bounds over the N grid, with Monte Carlo estimates and a
// violation flag (set when a bound undercuts the Monte Carlo estimate by
// more than 3 half-widths). Bounds that do not apply (unbounded gains for
// the Hoeffding form; non-i.i.d. or fading for the Chernoff form) are nan.
inline Table cmd_bounds(ScenarioFile file, bool with_mc = true,
                        const RunOverrides& ov = {}) {
  apply_overrides(file, ov);
  resolve_scenario(file);
  if (file.sweep.variable != SweepSpec::Variable::N) {
    throw ScenarioError("bounds: requires an N sweep");
  }
  Table table;
  table.header = {"N",           "hoeffding_H0", "hoeffding_H1",
                  "chernoff_H0", "chernoff_H1",  "mc_Pe",
                  "mc_ci95",     "vacuous",      "violation"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> grid = file.sweep.grid;
  std::sort(grid.begin(), grid.end());
  for (double g : grid) {
    const int N = static_cast<int>(std::lround(g));
    Scenario sc = file.scenario;
    sc.N = N;
    SimContext ctx(sc, N);
    const DetectorConfig& cfg = ctx.detector();
    const double sigma2 = sc.noise.variance_proxy();
    const double E_N = ctx.E_N();

    BoundPair hoeff{nan, nan, false};
    if (auto hm = sc.channel.h_max()) {
      hoeff = hoeffding_bound(cfg, sigma2, E_N, *hm / ctx.Z());
    }
    BoundPair chern{nan, nan, false};
    const bool iid = ctx.groups().size() == 1 && !ctx.is_markov();
    if (iid && sc.channel.kind() == ChannelModel::Kind::Equal) {
      chern = chernoff_bound_iid(cfg, sigma2 / (ctx.Z() * ctx.Z()), E_N);
    }

    double mc_pe = nan, mc_ci = nan;
    bool violation = false;
    if (with_mc) {
      const MCResult mc = estimate_error(ctx, Scheme::Seema, file.mc.trials,
                                         file.mc.seed, ov.threads);
      mc_pe = mc.pe;
      mc_ci = mc.ci95;
      auto check = [&](double bound, double est, double ci) {
        if (std::isfinite(bound) && bound < est - 3.0 * ci) violation = true;
      };
      check(hoeff.h0, mc.pe_h0, mc.ci_h0);
      check(hoeff.h1, mc.pe_h1, mc.ci_h1);
      check(chern.h0, mc.pe_h0, mc.ci_h0);
      check(chern.h1, mc.pe_h1, mc.ci_h1);
    }
    const bool vacuous = hoeff.vacuous || chern.vacuous;
    table.rows.push_back({std::to_string(N), format_g17(hoeff.h0),
                          format_g17(hoeff.h1), format_g17(chern.h0),
                          format_g17(chern.h1), format_g17(mc_pe),
                          format_g17(mc_ci), vacuous ? "1" : "0",
                          violation ? "1" : "0"});
  }
  return table;
}

}  // namespace seema
