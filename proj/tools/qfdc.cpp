// Copyright 2026 The qfdc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qfdc: calibrate the downconversion chain and run the measurement scenarios.
//
//   qfdc calibrate <config> [--out PATH]
//   qfdc run <scenario> <config> [--seed N] [--out PATH] [--calibration REPORT]
//            [--no-interferometer] [--threads N]
//   qfdc validate <config>
//
// Exit codes: 0 success, 1 usage or configuration error, 2 infeasible model.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qfdc/config.hpp"
#include "qfdc/csv.hpp"
#include "qfdc/qfdc.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;

fs::path output_path(const std::optional<std::string>& flag, const qfdc::ScenarioConfig& config,
                     const std::string& default_name) {
  if (flag) return *flag;
  if (config.output) return qfdc::resolve_path(config, *config.output);
  if (const char* dir = std::getenv("QFDC_OUTPUT_DIR"); dir && *dir) {
    return fs::path(dir) / default_name;
  }
  return default_name;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qfdc::ConfigError(path.string() + ": cannot write output");
  out << content;
}

int cmd_calibrate(const std::string& config_path, const std::optional<std::string>& out) {
  const auto config = qfdc::load_config(config_path);
  const auto result = qfdc::calibrate(qfdc::calibration_base(config), config.targets,
                                      config.bounds);
  const auto report = qfdc::calibration_report(config, result);
  const auto path = output_path(out, config, "calibration.json");
  write_file(path, report.dump(2) + "\n");

  std::cout << "fitted parameters:\n";
  for (const auto& [key, value] : report["fitted"].items()) {
    std::cout << "  " << std::left << std::setw(28) << key << value.get<double>() << "\n";
  }
  std::cout << "residuals:\n";
  for (const auto& r : result.residuals) {
    std::cout << "  " << std::left << std::setw(28) << r.name << "target " << std::setw(12)
              << r.target << " model " << std::setw(12) << r.model << " tol " << std::setw(10)
              << r.tolerance << (r.within() ? " ok" : " MISS") << "\n";
  }
  std::cout << "report written to " << path.string() << "\n";
  if (!result.feasible) {
    std::cerr << "calibration infeasible: targets cannot be met within bounds\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> calibration;
  std::optional<unsigned> threads;
  bool no_interferometer = false;
};

int cmd_run(const std::string& scenario, const std::string& config_path, const RunFlags& flags) {
  auto config = qfdc::load_config(config_path);
  bool known = false;
  for (const auto& s : qfdc::scenario_names()) known = known || s == scenario;
  if (!known) throw qfdc::ConfigError("scenario: unknown scenario '" + scenario + "'");
  if (flags.calibration) {
    qfdc::apply_report(config, qfdc::read_json_file(*flags.calibration));
  }
  auto chain = qfdc::resolved_chain(config);
  if (flags.no_interferometer) chain.interferometer.reset();

  qfdc::RunOptions options;
  options.seed = flags.seed.value_or(config.seed);
  options.threads = flags.threads.value_or(config.threads);

  std::ostringstream csv;
  std::ostringstream summary;
  summary << std::setprecision(6);
  const auto& g = config.grids;
  if (scenario == "fig4a") {
    options.gates_per_point = config.gates.fig4a;
    std::vector<double> watts;
    for (double mw : g.power_mw) watts.push_back(mw * 1e-3);
    const auto scan = qfdc::run_fig4a(watts, g.mu_fig4a, chain.without_interferometer(), options);
    qfdc::csv::write(csv, scan);
    if (scan.noise_fit) {
      summary << "noise slope " << scan.noise_fit->slope << " +/- " << scan.noise_fit->slope_sigma
              << " photons/gate/W (chi2 " << scan.noise_fit->chi2 << " / " << scan.noise_fit->dof
              << ")\n";
    }
  } else if (scenario == "fig4b") {
    options.gates_per_point = config.gates.fig4b;
    const auto scan = qfdc::run_fig4b(g.mu_fig4b, chain.without_interferometer(), options);
    qfdc::csv::write(csv, scan);
    summary << "signal-off floor " << scan.floor.p_click << " +/- " << scan.floor.sigma_p
            << " per gate\nfit slope " << scan.fit.slope << " +/- " << scan.fit.slope_sigma
            << " (expected " << scan.expected_slope << ")\n";
  } else if (scenario == "fig5") {
    options.gates_per_point = config.gates.fig5;
    const auto phis = qfdc::phase_grid(g.phi_points);
    const auto scan = qfdc::run_fig5(g.mu_fig5, phis, chain, options);
    qfdc::csv::write(csv, scan);
    summary << (scan.with_interferometer ? "" : "control run (no interferometer): ")
            << "visibility " << scan.visibility() << " +/- " << scan.visibility_sigma()
            << ", dark-subtracted " << scan.visibility_subtracted() << " +/- "
            << scan.visibility_subtracted_sigma() << "\n";
  } else {
    if (!chain.interferometer) {
      throw qfdc::ConfigError("interferometer.enabled: fig6 needs the interferometer");
    }
    options.gates_per_point = config.gates.fig6;
    const auto scan = qfdc::run_fig6(g.mu_fig6, chain, options, g.phi_points);
    qfdc::csv::write(csv, scan);
    if (scan.smallest_detectable_mu) {
      summary << "fringes resolved (V > 3 sigma) down to mu = " << *scan.smallest_detectable_mu
              << "\n";
    } else {
      summary << "no fringe resolved above 3 sigma\n";
    }
  }

  const auto path = output_path(flags.out, config, scenario + ".csv");
  write_file(path, csv.str());
  std::cout << summary.str() << "table written to " << path.string() << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const auto config = qfdc::load_config(config_path);
  std::cout << config_path << ": ok"
            << (config.calibrated() ? " (calibrated parameters present)" : "") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum frequency downconversion simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string scenario;
  std::optional<std::string> out;
  RunFlags flags;

  auto* calibrate = app.add_subcommand("calibrate", "fit the chain to the target observables");
  calibrate->add_option("config", config_path, "scenario config (JSON)")->required();
  calibrate->add_option("--out", out, "report path");

  auto* run = app.add_subcommand("run", "run a measurement scenario and write a CSV table");
  run->add_option("scenario", scenario, "fig4a | fig4b | fig5 | fig6")->required();
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--seed", flags.seed, "master seed (overrides config)");
  run->add_option("--out", flags.out, "CSV path");
  run->add_option("--calibration", flags.calibration, "calibration report to take parameters from");
  run->add_option("--threads", flags.threads, "sampling threads (0 = all cores)");
  run->add_flag("--no-interferometer", flags.no_interferometer,
                "remove the interferometer (fig5 control run)");

  auto* validate = app.add_subcommand("validate", "check a config without running anything");
  validate->add_option("config", config_path, "scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (calibrate->parsed()) return cmd_calibrate(config_path, out);
    if (run->parsed()) return cmd_run(scenario, config_path, flags);
    return cmd_validate(config_path);
  } catch (const qfdc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const qfdc::InvalidArgument& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
  } catch (const qfdc::UnsupportedProcess& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
  }
  return kExitConfig;
}
