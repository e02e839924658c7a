#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seema/sim.hpp"

namespace seema {

using nlohmann::json;

class ScenarioError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ============================================================================
// Scenario files
// ============================================================================

struct SweepSpec {
  enum class Variable { N, XLower, PeTarget };
  Variable variable = Variable::N;
  std::vector<double> grid;
  std::optional<int> N;  // fixed N for X_L / Pe-target sweeps
};

struct McSpec {
  long trials = 100000;
  std::uint64_t seed = 1;
};

// Parsed scenario document. `target_fraction` is set when the region was
// given as a transmit budget; resolve() then calibrates X_L.
struct ScenarioFile {
  Scenario scenario;
  SweepSpec sweep;
  std::vector<Scheme> schemes;
  McSpec mc;
  RegionShape region_shape = RegionShape::TwoSided;
  std::optional<double> target_fraction;
  bool has_region = false;
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ScenarioError(where + ": unknown key '" + item.key() + "'");
  }
}

inline double get_num(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ScenarioError(where + ": missing numeric '" + std::string(key) + "'");
  }
  return j.at(key).get<double>();
}

inline MarkovChainParams parse_chain(const json& j, const std::string& where) {
  check_keys(j, {"alpha", "beta"}, where);
  return MarkovChainParams{get_num(j, "alpha", where), get_num(j, "beta", where)};
}

inline ObservationSpec parse_observation(const json& j) {
  check_keys(j, {"kind", "theta", "sigma_theta2", "sigma_v2", "groups", "h0",
                 "h1", "initial_state"},
             "observation");
  const std::string kind = j.value("kind", "");
  if (kind == "dc-in-awgn") {
    return IidObservations{ScalarGaussianModel::dc_in_awgn(
        get_num(j, "theta", "observation"),
        get_num(j, "sigma_v2", "observation"))};
  }
  if (kind == "gaussian-variance") {
    return IidObservations{ScalarGaussianModel::gaussian_variance(
        get_num(j, "sigma_theta2", "observation"),
        get_num(j, "sigma_v2", "observation"))};
  }
  if (kind == "gaussian-variance-groups") {
    const double sigma_v2 = get_num(j, "sigma_v2", "observation");
    if (!j.contains("groups") || !j.at("groups").is_array() ||
        j.at("groups").empty()) {
      throw ScenarioError("observation: groups must be a nonempty array");
    }
    GroupedObservations out;
    double total = 0.0;
    for (const auto& gj : j.at("groups")) {
      check_keys(gj, {"weight", "sigma_theta2"}, "observation.groups[]");
      const double w = get_num(gj, "weight", "observation.groups[]");
      total += w;
      out.groups.emplace_back(w, ScalarGaussianModel::gaussian_variance(
                                     get_num(gj, "sigma_theta2",
                                             "observation.groups[]"),
                                     sigma_v2));
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ScenarioError("observation: group weights must sum to 1");
    }
    return out;
  }
  if (kind == "markov-binary") {
    if (!j.contains("h0") || !j.contains("h1")) {
      throw ScenarioError("observation: markov-binary needs h0 and h1 chains");
    }
    MarkovField field{parse_chain(j.at("h0"), "observation.h0"),
                      parse_chain(j.at("h1"), "observation.h1"),
                      std::nullopt};
    if (j.contains("initial_state")) {
      field.initial_state = j.at("initial_state").get<int>();
    }
    field.validate();
    return MarkovObservations{field};
  }
  throw ScenarioError("observation: unknown kind '" + kind + "'");
}

inline ChannelModel parse_channel(const json& j) {
  check_keys(j, {"kind", "gain", "received_power", "p"}, "channel");
  const std::string kind = j.value("kind", "");
  if (kind == "equal") return ChannelModel::equal(get_num(j, "gain", "channel"));
  if (kind == "rayleigh") {
    return ChannelModel::rayleigh(get_num(j, "received_power", "channel"));
  }
  if (kind == "on-off") {
    return ChannelModel::on_off(get_num(j, "p", "channel"),
                                get_num(j, "gain", "channel"));
  }
  throw ScenarioError("channel: unknown kind '" + kind + "'");
}

inline Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::Seema, Scheme::TdmaNoisy, Scheme::TdmaNoiseless,
                   Scheme::CountingNoiseless, Scheme::LbmaNoisy, Scheme::CvTsa,
                   Scheme::CopulaForward}) {
    if (name == scheme_name(s)) return s;
  }
  throw ScenarioError("schemes: unknown scheme '" + name + "'");
}

}  // namespace detail

inline ScenarioFile parse_scenario_file(const json& doc) {
  try {
    detail::check_keys(doc,
                       {"observation", "region", "channel", "noise", "detector",
                        "energy", "sweep", "schemes", "mc"},
                       "scenario");
    ScenarioFile out;
    if (!doc.contains("observation")) {
      throw ScenarioError("scenario: missing 'observation'");
    }
    out.scenario.observations = detail::parse_observation(doc.at("observation"));
    const bool markov =
        std::holds_alternative<MarkovObservations>(out.scenario.observations);

    if (doc.contains("region")) {
      if (markov) {
        throw ScenarioError("region: not applicable to markov-binary (Gamma={1})");
      }
      const json& r = doc.at("region");
      detail::check_keys(r, {"shape", "X_L", "target_fraction"}, "region");
      const std::string shape = r.value("shape", "");
      if (shape == "one-sided") {
        out.region_shape = RegionShape::OneSided;
      } else if (shape == "two-sided") {
        out.region_shape = RegionShape::TwoSided;
      } else {
        throw ScenarioError("region: shape must be one-sided or two-sided");
      }
      if (r.contains("X_L") == r.contains("target_fraction")) {
        throw ScenarioError("region: give exactly one of X_L, target_fraction");
      }
      if (r.contains("X_L")) {
        out.scenario.region = make_threshold_region(
            out.region_shape, detail::get_num(r, "X_L", "region"));
      } else {
        out.target_fraction = detail::get_num(r, "target_fraction", "region");
      }
      out.has_region = true;
    } else if (!markov) {
      throw ScenarioError("scenario: missing 'region'");
    }

    if (doc.contains("channel")) {
      out.scenario.channel = detail::parse_channel(doc.at("channel"));
    }
    if (doc.contains("noise")) {
      detail::check_keys(doc.at("noise"), {"sigma2"}, "noise");
      out.scenario.noise =
          NoiseSpec::gaussian(detail::get_num(doc.at("noise"), "sigma2", "noise"));
    }
    if (doc.contains("detector")) {
      const json& d = doc.at("detector");
      detail::check_keys(d, {"eta", "Z"}, "detector");
      if (d.contains("eta")) out.scenario.eta = detail::get_num(d, "eta", "detector");
      if (d.contains("Z")) {
        if (d.at("Z").is_string()) {
          if (d.at("Z").get<std::string>() != "auto") {
            throw ScenarioError("detector: Z must be a number or \"auto\"");
          }
        } else {
          out.scenario.Z = detail::get_num(d, "Z", "detector");
        }
      }
      if (!(out.scenario.eta > 0.0)) throw ScenarioError("detector: eta must be > 0");
    }
    if (doc.contains("energy")) {
      const json& e = doc.at("energy");
      detail::check_keys(e, {"rule", "E", "c"}, "energy");
      const std::string rule = e.value("rule", "constant");
      if (rule == "constant") {
        out.scenario.energy = {EnergyRule::Kind::Constant,
                               detail::get_num(e, "E", "energy")};
      } else if (rule == "power") {
        out.scenario.energy = {EnergyRule::Kind::Power,
                               detail::get_num(e, "c", "energy")};
      } else {
        throw ScenarioError("energy: rule must be constant or power");
      }
    }
    if (doc.contains("sweep")) {
      const json& s = doc.at("sweep");
      detail::check_keys(s, {"variable", "grid", "N"}, "sweep");
      const std::string var = s.value("variable", "N");
      if (var == "N") {
        out.sweep.variable = SweepSpec::Variable::N;
      } else if (var == "X_L") {
        out.sweep.variable = SweepSpec::Variable::XLower;
      } else if (var == "Pe_target") {
        out.sweep.variable = SweepSpec::Variable::PeTarget;
      } else {
        throw ScenarioError("sweep: variable must be N, X_L or Pe_target");
      }
      if (!s.contains("grid") || !s.at("grid").is_array() || s.at("grid").empty()) {
        throw ScenarioError("sweep: grid must be a nonempty array");
      }
      for (const auto& v : s.at("grid")) out.sweep.grid.push_back(v.get<double>());
      if (s.contains("N")) out.sweep.N = s.at("N").get<int>();
      if (out.sweep.variable == SweepSpec::Variable::XLower && !out.sweep.N) {
        throw ScenarioError("sweep: X_L sweeps need a fixed N");
      }
    } else {
      throw ScenarioError("scenario: missing 'sweep'");
    }
    if (doc.contains("schemes")) {
      for (const auto& s : doc.at("schemes")) {
        out.schemes.push_back(detail::parse_scheme(s.get<std::string>()));
      }
    }
    if (doc.contains("mc")) {
      const json& m = doc.at("mc");
      detail::check_keys(m, {"trials", "seed"}, "mc");
      if (m.contains("trials")) out.mc.trials = m.at("trials").get<long>();
      if (m.contains("seed")) out.mc.seed = m.at("seed").get<std::uint64_t>();
      if (out.mc.trials < 1) throw ScenarioError("mc: trials must be >= 1");
    }
    out.scenario.N = out.sweep.N.value_or(
        out.sweep.variable == SweepSpec::Variable::N && !out.sweep.grid.empty()
            ? static_cast<int>(out.sweep.grid.front())
            : 100);
    return out;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: malformed document: ") + e.what());
  }
}

// Groups of the observation spec as (weight, model) pairs; empty for markov.
inline std::vector<ModelGroup> observation_groups(const Scenario& sc) {
  if (const auto* iid = std::get_if<IidObservations>(&sc.observations)) {
    return {{1.0, iid->model}};
  }
  if (const auto* g = std::get_if<GroupedObservations>(&sc.observations)) {
    return g->groups;
  }
  return {};
}

// Calibrates the region when the file gave a transmit budget, using the MAP
// priors implied by eta.
inline void resolve_scenario(ScenarioFile& file) {
  if (file.target_fraction) {
    auto groups = observation_groups(file.scenario);
    const Priors priors{file.scenario.prior_h0(), file.scenario.prior_h1()};
    file.scenario.region = calibrate_region(
        std::span<const ModelGroup>(groups.data(), groups.size()), priors,
        *file.target_fraction, file.region_shape);
    file.target_fraction.reset();
  }
}

// Fully-resolved scenario document: calibrated X_L, numeric Z, effective
// trials and seed. Re-running this document reproduces the outputs.
inline json resolved_scenario_json(const ScenarioFile& file) {
  json doc;
  const Scenario& sc = file.scenario;
  if (const auto* iid = std::get_if<IidObservations>(&sc.observations)) {
    const auto& m = iid->model;
    if (m.kind() == ScalarGaussianModel::Kind::DcInAwgn) {
      doc["observation"] = {{"kind", "dc-in-awgn"},
                            {"theta", m.signal_param()},
                            {"sigma_v2", m.noise_variance()}};
    } else {
      doc["observation"] = {{"kind", "gaussian-variance"},
                            {"sigma_theta2", m.signal_param()},
                            {"sigma_v2", m.noise_variance()}};
    }
  } else if (const auto* g = std::get_if<GroupedObservations>(&sc.observations)) {
    json groups = json::array();
    for (const auto& [w, m] : g->groups) {
      groups.push_back({{"weight", w}, {"sigma_theta2", m.signal_param()}});
    }
    doc["observation"] = {{"kind", "gaussian-variance-groups"},
                          {"sigma_v2", g->groups.front().second.noise_variance()},
                          {"groups", groups}};
  } else {
    const auto& f = std::get<MarkovObservations>(sc.observations).field;
    doc["observation"] = {{"kind", "markov-binary"},
                          {"h0", {{"alpha", f.h0.alpha}, {"beta", f.h0.beta}}},
                          {"h1", {{"alpha", f.h1.alpha}, {"beta", f.h1.beta}}}};
    if (f.initial_state) doc["observation"]["initial_state"] = *f.initial_state;
  }
  if (file.has_region) {
    json region;
    region["shape"] =
        file.region_shape == RegionShape::OneSided ? "one-sided" : "two-sided";
    if (const auto* one = std::get_if<OneSidedRegion>(&sc.region)) {
      region["X_L"] = one->x_lower;
    } else if (const auto* two = std::get_if<TwoSidedRegion>(&sc.region)) {
      region["X_L"] = two->x_lower;
    }
    doc["region"] = region;
  }
  switch (sc.channel.kind()) {
    case ChannelModel::Kind::Equal:
      doc["channel"] = {{"kind", "equal"}, {"gain", sc.channel.gain()}};
      break;
    case ChannelModel::Kind::Rayleigh:
      doc["channel"] = {{"kind", "rayleigh"},
                        {"received_power", sc.channel.param()}};
      break;
    case ChannelModel::Kind::OnOff:
      doc["channel"] = {{"kind", "on-off"},
                        {"p", sc.channel.param()},
                        {"gain", sc.channel.gain()}};
      break;
  }
  doc["noise"] = {{"sigma2", sc.noise.variance_proxy()}};
  doc["detector"] = {{"eta", sc.eta},
                     {"Z", sc.Z.value_or(choose_Z(sc.channel))}};
  doc["energy"] =
      sc.energy.kind == EnergyRule::Kind::Constant
          ? json{{"rule", "constant"}, {"E", sc.energy.value}}
          : json{{"rule", "power"}, {"c", sc.energy.value}};
  json sweep;
  switch (file.sweep.variable) {
    case SweepSpec::Variable::N: sweep["variable"] = "N"; break;
    case SweepSpec::Variable::XLower: sweep["variable"] = "X_L"; break;
    case SweepSpec::Variable::PeTarget: sweep["variable"] = "Pe_target"; break;
  }
  sweep["grid"] = file.sweep.grid;
  if (file.sweep.N) sweep["N"] = *file.sweep.N;
  doc["sweep"] = sweep;
  json schemes = json::array();
  for (Scheme s : file.schemes) schemes.push_back(scheme_name(s));
  doc["schemes"] = schemes;
  doc["mc"] = {{"trials", file.mc.trials}, {"seed", file.mc.seed}};
  return doc;
}

}  // namespace seema
