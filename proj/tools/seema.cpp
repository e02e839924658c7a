// Command-line runner: scenario-driven experiments (exponent, simulate,
// sweep-region, bounds) emitting CSV or JSON tables plus a fully-resolved
// scenario for provenance.
//
// Exit codes: 0 success, 2 scenario error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seema/runner.hpp"

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::string out_path;
  std::string format = "csv";
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool scenario_required) {
  auto* opt = cmd->add_option("--scenario", args.scenario_path,
                              "Scenario file (JSON)");
  if (scenario_required) opt->required();
  cmd->add_option("--seed", args.seed, "Override mc.seed");
  cmd->add_option("--trials", args.trials, "Override mc.trials");
  cmd->add_option("--out", args.out_path, "Write results to this path");
  cmd->add_option("--format", args.format, "Output format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", args.threads, "Worker threads (0 = auto)");
}

seema::ScenarioFile load_scenario(const CommonArgs& args) {
  std::ifstream in(args.scenario_path);
  if (!in) {
    throw seema::ScenarioError("cannot open scenario file: " +
                               args.scenario_path);
  }
  seema::json doc;
  try {
    in >> doc;
  } catch (const seema::json::exception& e) {
    throw seema::ScenarioError(std::string("scenario JSON parse error: ") +
                               e.what());
  }
  seema::ScenarioFile file = seema::parse_scenario_file(doc);
  seema::RunOverrides ov{args.trials, args.seed, args.threads};
  seema::apply_overrides(file, ov);
  return file;
}

// Results go to --out (or stdout); the resolved scenario goes to
// <out>.resolved.json (or stderr) so every emitted table carries its
// provenance.
void emit(const seema::Table& table, const seema::json& resolved,
          const CommonArgs& args) {
  std::string payload;
  if (args.format == "csv") {
    payload = table.to_csv();
  } else {
    seema::json doc;
    doc["scenario"] = resolved;
    doc["rows"] = table.to_json();
    payload = doc.dump(2);
    payload += '\n';
  }
  if (args.out_path.empty()) {
    std::cout << payload;
    if (args.format == "csv" && !resolved.is_null()) {
      std::cerr << "resolved scenario: " << resolved.dump() << "\n";
    }
  } else {
    std::ofstream out(args.out_path);
    if (!out) {
      throw seema::ScenarioError("cannot write output file: " + args.out_path);
    }
    out << payload;
    if (args.format == "csv" && !resolved.is_null()) {
      std::ofstream side(args.out_path + ".resolved.json");
      side << resolved.dump(2) << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Censoring-based multiple-access detection toolkit"};
  app.require_subcommand(1);

  CommonArgs exp_args, sim_args, bounds_args, sweep_args;
  double theta = 2.0, sigma_v2 = 1.0;
  double xl_min = -4.0, xl_max = 4.0, xl_step = 0.01;
  bool bounds_no_mc = false;

  auto* cmd_exp = app.add_subcommand("exponent", "Asymptotic error exponents");
  add_common(cmd_exp, exp_args, true);

  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo error sweep");
  add_common(cmd_sim, sim_args, true);

  auto* cmd_bounds =
      app.add_subcommand("bounds", "Finite-sample bounds over the N grid");
  add_common(cmd_bounds, bounds_args, true);
  cmd_bounds->add_flag("--no-mc", bounds_no_mc,
                       "Skip the Monte Carlo comparison column");

  auto* cmd_sweep = app.add_subcommand(
      "sweep-region", "Exponent vs one-sided region threshold (DC in AWGN)");
  add_common(cmd_sweep, sweep_args, false);
  cmd_sweep->add_option("--theta", theta, "DC level under H1");
  cmd_sweep->add_option("--sigma-v2", sigma_v2, "Observation noise variance");
  cmd_sweep->add_option("--xl-min", xl_min, "Grid start");
  cmd_sweep->add_option("--xl-max", xl_max, "Grid end");
  cmd_sweep->add_option("--xl-step", xl_step, "Grid step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (cmd_exp->parsed()) {
      seema::ScenarioFile file = load_scenario(exp_args);
      seema::resolve_scenario(file);
      emit(seema::cmd_exponent(file), seema::resolved_scenario_json(file),
           exp_args);
    } else if (cmd_sim->parsed()) {
      seema::ScenarioFile file = load_scenario(sim_args);
      seema::resolve_scenario(file);
      seema::RunOverrides ov{std::nullopt, std::nullopt, sim_args.threads};
      emit(seema::cmd_simulate(file, ov), seema::resolved_scenario_json(file),
           sim_args);
    } else if (cmd_bounds->parsed()) {
      seema::ScenarioFile file = load_scenario(bounds_args);
      seema::resolve_scenario(file);
      seema::RunOverrides ov{std::nullopt, std::nullopt, bounds_args.threads};
      emit(seema::cmd_bounds(file, !bounds_no_mc, ov),
           seema::resolved_scenario_json(file), bounds_args);
    } else if (cmd_sweep->parsed()) {
      if (!sweep_args.scenario_path.empty()) {
        seema::ScenarioFile file = load_scenario(sweep_args);
        const auto* iid =
            std::get_if<seema::IidObservations>(&file.scenario.observations);
        if (!iid ||
            iid->model.kind() != seema::ScalarGaussianModel::Kind::DcInAwgn) {
          throw seema::ScenarioError(
              "sweep-region: scenario must use a dc-in-awgn observation model");
        }
        theta = iid->model.signal_param();
        sigma_v2 = iid->model.noise_variance();
        if (file.sweep.variable == seema::SweepSpec::Variable::XLower) {
          emit(seema::cmd_sweep_region(theta, sigma_v2, file.sweep.grid),
               seema::resolved_scenario_json(file), sweep_args);
          return 0;
        }
      }
      if (!(xl_step > 0.0) || xl_max < xl_min) {
        throw seema::ScenarioError("sweep-region: bad grid");
      }
      std::vector<double> grid;
      for (double x = xl_min; x <= xl_max + 0.5 * xl_step; x += xl_step) {
        grid.push_back(x);
      }
      emit(seema::cmd_sweep_region(theta, sigma_v2, grid), seema::json(),
           sweep_args);
    }
  } catch (const seema::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 2;
  } catch (const seema::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
