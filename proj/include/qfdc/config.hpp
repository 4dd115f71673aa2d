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

// JSON scenario configuration and calibration reports.
//
// Every object is read strictly: unknown keys are rejected with the full
// key path. Calibrated chain fields may be omitted; they are then filled in
// from a calibration report or produced by `calibrate`.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qfdc/calibration.hpp"
#include "qfdc/experiment.hpp"

namespace qfdc {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioGrids {
  std::vector<double> power_mw{0, 3, 6, 9, 12, 15, 18, 21, 24, 27};
  double mu_fig4a = 125.0;
  std::vector<double> mu_fig4b{0.01, 0.03, 0.1, 0.3, 1, 3, 10, 125};
  double mu_fig5 = 0.7;
  std::size_t phi_points = 16;
  std::vector<double> mu_fig6{0.01, 0.03, 0.09, 0.2, 0.4, 0.7, 1.5, 3, 10, 30, 143};
};

struct GateCounts {
  std::uint64_t fig4a = 40'000'000;
  std::uint64_t fig4b = 100'000'000;
  std::uint64_t fig5 = 40'000'000;
  std::uint64_t fig6 = 40'000'000;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"fig4a", "fig4b", "fig5", "fig6"};
  return names;
}

struct ScenarioConfig {
  DetectorSpec detector;

  double pump_wavelength_nm = 1551.1;
  double signal_wavelength_nm = 712.9;
  double eta_nor_per_w = 2.0;
  double pump_power_w = 0.027;
  double leak_fraction = 0.8;
  std::optional<double> system_transmission;
  std::optional<double> noise_coeff_beta;

  bool interferometer_enabled = true;
  double phase_bias_rad = 0.0;
  double oob_suppression_db = 12.0;
  std::optional<double> insertion_transmission;

  std::optional<double> post_converter_transmission;
  std::optional<double> intrinsic_visibility_v0;

  std::optional<std::string> calibration_report;
  CalibrationTargets targets;
  CalibrationBounds bounds;

  std::optional<std::string> scenario;
  ScenarioGrids grids;
  GateCounts gates;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::optional<std::string> output;

  /// Directory relative paths inside the file are resolved against.
  std::filesystem::path base_dir;

  bool calibrated() const {
    return system_transmission && noise_coeff_beta && insertion_transmission &&
           post_converter_transmission && intrinsic_visibility_v0;
  }
};

namespace detail {

class Reader {
 public:
  Reader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  ~Reader() = default;

  /// Call once all known keys were read.
  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) fail(name(key), "unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) fail(name(key), "expected a number");
    out = v.get<double>();
  }

  void number(const std::string& key, std::optional<double>& out) {
    if (!has(key)) return;
    double v = 0.0;
    number(key, v);
    out = v;
  }

  void count(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
      return;
    }
    if (v.is_number()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d <= 1.8e19 && std::floor(d) == d) {
        out = static_cast<std::uint64_t>(d);
        return;
      }
    }
    fail(name(key), "expected a non-negative integer");
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) fail(name(key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::optional<std::string>& out) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_string()) fail(name(key), "expected a string");
    out = v.get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_array() || v.empty()) fail(name(key), "expected a non-empty array of numbers");
    out.clear();
    for (const auto& x : v) {
      if (!x.is_number()) fail(name(key), "expected a non-empty array of numbers");
      out.push_back(x.get<double>());
    }
  }

  template <typename F>
  void object(const std::string& key, F&& read) {
    if (!has(key)) return;
    Reader sub(obj_.at(key), name(key));
    read(sub);
    sub.finish();
  }

  void bounds(const std::string& key, ParameterBounds& out) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(name(key), "expected [lo, hi]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  std::string name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& what) {
    throw ConfigError(key + ": " + what);
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) Reader::fail(key, what);
}

}  // namespace detail

inline ScenarioConfig parse_config(const Json& doc) {
  ScenarioConfig c;
  detail::Reader root(doc, "");
  root.object("detector", [&](detail::Reader& r) {
    r.number("efficiency", c.detector.efficiency);
    r.number("dark_prob_per_gate", c.detector.dark_prob_per_gate);
    r.number("gate_rate_hz", c.detector.gate_rate_hz);
  });
  root.object("converter", [&](detail::Reader& r) {
    r.number("pump_wavelength_nm", c.pump_wavelength_nm);
    r.number("signal_wavelength_nm", c.signal_wavelength_nm);
    r.number("eta_nor_per_w", c.eta_nor_per_w);
    r.number("pump_power_w", c.pump_power_w);
    r.number("leak_fraction", c.leak_fraction);
    r.number("system_transmission", c.system_transmission);
    r.number("noise_coeff_beta", c.noise_coeff_beta);
  });
  root.object("interferometer", [&](detail::Reader& r) {
    r.boolean("enabled", c.interferometer_enabled);
    r.number("phase_bias_rad", c.phase_bias_rad);
    r.number("oob_suppression_db", c.oob_suppression_db);
    r.number("insertion_transmission", c.insertion_transmission);
  });
  root.number("post_converter_transmission", c.post_converter_transmission);
  root.number("intrinsic_visibility_v0", c.intrinsic_visibility_v0);
  root.string("calibration_report", c.calibration_report);
  root.object("targets", [&](detail::Reader& r) {
    auto& t = c.targets;
    r.number("pump_power_w", t.pump_power_w);
    r.number("efficiency", t.efficiency);
    r.number("efficiency_tol_rel", t.efficiency_tol_rel);
    r.number("floor_no_interferometer", t.floor_no_interferometer);
    r.number("floor_with_interferometer", t.floor_with_interferometer);
    r.number("floor_tol_rel", t.floor_tol_rel);
    r.number("mu_high", t.mu_high);
    r.number("visibility_high", t.visibility_high);
    r.number("visibility_high_tol", t.visibility_high_tol);
    r.number("mu_low", t.mu_low);
    r.number("visibility_raw", t.visibility_raw);
    r.number("visibility_raw_tol", t.visibility_raw_tol);
    r.number("visibility_sub", t.visibility_sub);
    r.number("visibility_sub_tol", t.visibility_sub_tol);
  });
  root.object("bounds", [&](detail::Reader& r) {
    auto& b = c.bounds;
    r.bounds("system_transmission", b.system_transmission);
    r.bounds("noise_coeff_beta", b.noise_coeff_beta);
    r.bounds("post_converter_transmission", b.post_converter_transmission);
    r.bounds("insertion_transmission", b.insertion_transmission);
    r.bounds("intrinsic_visibility_v0", b.intrinsic_visibility_v0);
  });
  root.string("scenario", c.scenario);
  root.object("grids", [&](detail::Reader& r) {
    auto& g = c.grids;
    r.numbers("power_mw", g.power_mw);
    r.number("mu_fig4a", g.mu_fig4a);
    r.numbers("mu_fig4b", g.mu_fig4b);
    r.number("mu_fig5", g.mu_fig5);
    std::uint64_t phi = g.phi_points;
    r.count("phi_points", phi);
    g.phi_points = static_cast<std::size_t>(phi);
    r.numbers("mu_fig6", g.mu_fig6);
  });
  root.object("gates_per_point", [&](detail::Reader& r) {
    r.count("fig4a", c.gates.fig4a);
    r.count("fig4b", c.gates.fig4b);
    r.count("fig5", c.gates.fig5);
    r.count("fig6", c.gates.fig6);
  });
  root.count("seed", c.seed);
  std::uint64_t threads = 0;
  root.count("threads", threads);
  c.threads = static_cast<unsigned>(threads);
  root.string("output", c.output);
  root.finish();
  return c;
}

namespace detail {

// Placeholder values for calibrated fields that are still missing; only used
// to check the fields that are present.
inline ChainParams chain_with_defaults(const ScenarioConfig& c) {
  ConverterSpec conv{derive_process(mode_from_wavelength(c.pump_wavelength_nm),
                                    mode_from_wavelength(c.signal_wavelength_nm))};
  conv.eta_nor = c.eta_nor_per_w;
  conv.pump_power_w = c.pump_power_w;
  conv.leak_fraction = c.leak_fraction;
  conv.system_transmission = c.system_transmission.value_or(1.0);
  conv.noise_coeff_beta = c.noise_coeff_beta.value_or(0.0);

  InterferometerSpec ifm;
  ifm.phase_bias_theta = c.phase_bias_rad;
  ifm.oob_suppression_db = c.oob_suppression_db;
  ifm.insertion_transmission = c.insertion_transmission.value_or(1.0);

  return ChainParams{conv, ifm, c.detector, c.post_converter_transmission.value_or(1.0),
                     c.intrinsic_visibility_v0.value_or(1.0)};
}

}  // namespace detail

/// Checks every field against the model invariants.
inline void validate_config(const ScenarioConfig& c) {
  using detail::check;
  check(c.pump_wavelength_nm > 0.0, "converter.pump_wavelength_nm", "must be positive");
  check(c.signal_wavelength_nm > 0.0, "converter.signal_wavelength_nm", "must be positive");
  check(c.pump_wavelength_nm != c.signal_wavelength_nm, "converter.pump_wavelength_nm",
        "must differ from the signal wavelength");
  const auto process = derive_process(mode_from_wavelength(c.pump_wavelength_nm),
                                      mode_from_wavelength(c.signal_wavelength_nm));
  check(process.kind() == ProcessKind::BeamsplitterType, "converter.pump_wavelength_nm",
        "pump frequency above the signal gives amplifier-type DFG, which cannot convert");

  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  check(unit(c.detector.efficiency), "detector.efficiency", "must lie in [0, 1]");
  check(unit(c.detector.dark_prob_per_gate), "detector.dark_prob_per_gate", "must lie in [0, 1]");
  check(c.detector.gate_rate_hz > 0.0, "detector.gate_rate_hz", "must be positive");
  check(c.eta_nor_per_w >= 0.0, "converter.eta_nor_per_w", "must be >= 0");
  check(c.pump_power_w >= 0.0, "converter.pump_power_w", "must be >= 0");
  check(unit(c.leak_fraction), "converter.leak_fraction", "must lie in [0, 1]");
  check(!c.system_transmission || unit(*c.system_transmission), "converter.system_transmission",
        "must lie in [0, 1]");
  check(!c.noise_coeff_beta || *c.noise_coeff_beta >= 0.0, "converter.noise_coeff_beta",
        "must be >= 0");
  check(c.oob_suppression_db >= 0.0, "interferometer.oob_suppression_db", "must be >= 0");
  check(!c.insertion_transmission || unit(*c.insertion_transmission),
        "interferometer.insertion_transmission", "must lie in [0, 1]");
  check(!c.post_converter_transmission || unit(*c.post_converter_transmission),
        "post_converter_transmission", "must lie in [0, 1]");
  check(!c.intrinsic_visibility_v0 || unit(*c.intrinsic_visibility_v0),
        "intrinsic_visibility_v0", "must lie in [0, 1]");

  try {
    c.targets.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("targets: ") + e.what());
  }
  try {
    c.bounds.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("bounds: ") + e.what());
  }

  if (c.scenario) {
    bool known = false;
    for (const auto& s : scenario_names()) known = known || s == *c.scenario;
    check(known, "scenario", "unknown scenario '" + *c.scenario + "'");
  }
  for (double p : c.grids.power_mw) check(p >= 0.0, "grids.power_mw", "powers must be >= 0");
  check(c.grids.mu_fig4a > 0.0, "grids.mu_fig4a", "must be positive");
  for (double m : c.grids.mu_fig4b) check(m >= 0.0, "grids.mu_fig4b", "mu must be >= 0");
  check(c.grids.mu_fig5 >= 0.0, "grids.mu_fig5", "must be >= 0");
  check(c.grids.phi_points >= 4, "grids.phi_points", "need at least 4 phase points");
  for (double m : c.grids.mu_fig6) check(m >= 0.0, "grids.mu_fig6", "mu must be >= 0");
  for (auto [n, key] : {std::pair{c.gates.fig4a, "gates_per_point.fig4a"},
                        std::pair{c.gates.fig4b, "gates_per_point.fig4b"},
                        std::pair{c.gates.fig5, "gates_per_point.fig5"},
                        std::pair{c.gates.fig6, "gates_per_point.fig6"}}) {
    check(n >= 1, key, "need at least one gate");
  }
  detail::chain_with_defaults(c).validate();
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  auto c = parse_config(read_json_file(path));
  c.base_dir = path.parent_path();
  validate_config(c);
  return c;
}

inline std::filesystem::path resolve_path(const ScenarioConfig& c, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : c.base_dir / path;
}

/// Copies fitted values from a calibration report into the config.
inline void apply_report(ScenarioConfig& c, const Json& report) {
  if (!report.is_object() || !report.contains("fitted") || !report["fitted"].is_object()) {
    throw ConfigError("calibration_report: missing 'fitted' section");
  }
  const auto& f = report["fitted"];
  auto get = [&](const char* key) {
    if (!f.contains(key) || !f[key].is_number()) {
      throw ConfigError(std::string("calibration_report: fitted.") + key + " missing");
    }
    return f[key].get<double>();
  };
  c.system_transmission = get("system_transmission");
  c.noise_coeff_beta = get("noise_coeff_beta");
  c.post_converter_transmission = get("post_converter_transmission");
  c.insertion_transmission = get("insertion_transmission");
  c.intrinsic_visibility_v0 = get("intrinsic_visibility_v0");
}

/// Chain for calibration: calibrated fields, if present, are ignored.
inline ChainParams calibration_base(const ScenarioConfig& c) {
  validate_config(c);
  return detail::chain_with_defaults(c);
}

/// Fully specified chain for scenario runs. Missing calibrated fields are
/// taken from calibration_report; anything still missing is an error.
inline ChainParams resolved_chain(ScenarioConfig c) {
  if (!c.calibrated() && c.calibration_report) {
    apply_report(c, read_json_file(resolve_path(c, *c.calibration_report)));
  }
  const std::pair<bool, const char*> required[] = {
      {c.system_transmission.has_value(), "converter.system_transmission"},
      {c.noise_coeff_beta.has_value(), "converter.noise_coeff_beta"},
      {c.insertion_transmission.has_value(), "interferometer.insertion_transmission"},
      {c.post_converter_transmission.has_value(), "post_converter_transmission"},
      {c.intrinsic_visibility_v0.has_value(), "intrinsic_visibility_v0"},
  };
  for (const auto& [present, key] : required) {
    if (!present) {
      throw ConfigError(std::string(key) +
                        ": missing parameter (give it explicitly or set calibration_report)");
    }
  }
  validate_config(c);
  auto chain = detail::chain_with_defaults(c);
  if (!c.interferometer_enabled) chain.interferometer.reset();
  return chain;
}

inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["detector"] = {{"efficiency", c.detector.efficiency},
                   {"dark_prob_per_gate", c.detector.dark_prob_per_gate},
                   {"gate_rate_hz", c.detector.gate_rate_hz}};
  Json conv = {{"pump_wavelength_nm", c.pump_wavelength_nm},
               {"signal_wavelength_nm", c.signal_wavelength_nm},
               {"eta_nor_per_w", c.eta_nor_per_w},
               {"pump_power_w", c.pump_power_w},
               {"leak_fraction", c.leak_fraction}};
  if (c.system_transmission) conv["system_transmission"] = *c.system_transmission;
  if (c.noise_coeff_beta) conv["noise_coeff_beta"] = *c.noise_coeff_beta;
  j["converter"] = conv;
  Json ifm = {{"enabled", c.interferometer_enabled},
              {"phase_bias_rad", c.phase_bias_rad},
              {"oob_suppression_db", c.oob_suppression_db}};
  if (c.insertion_transmission) ifm["insertion_transmission"] = *c.insertion_transmission;
  j["interferometer"] = ifm;
  if (c.post_converter_transmission) j["post_converter_transmission"] = *c.post_converter_transmission;
  if (c.intrinsic_visibility_v0) j["intrinsic_visibility_v0"] = *c.intrinsic_visibility_v0;
  if (c.calibration_report) j["calibration_report"] = *c.calibration_report;
  const auto& t = c.targets;
  j["targets"] = {{"pump_power_w", t.pump_power_w},
                  {"efficiency", t.efficiency},
                  {"efficiency_tol_rel", t.efficiency_tol_rel},
                  {"floor_no_interferometer", t.floor_no_interferometer},
                  {"floor_with_interferometer", t.floor_with_interferometer},
                  {"floor_tol_rel", t.floor_tol_rel},
                  {"mu_high", t.mu_high},
                  {"visibility_high", t.visibility_high},
                  {"visibility_high_tol", t.visibility_high_tol},
                  {"mu_low", t.mu_low},
                  {"visibility_raw", t.visibility_raw},
                  {"visibility_raw_tol", t.visibility_raw_tol},
                  {"visibility_sub", t.visibility_sub},
                  {"visibility_sub_tol", t.visibility_sub_tol}};
  auto pair = [](const ParameterBounds& b) { return Json::array({b.lo, b.hi}); };
  j["bounds"] = {{"system_transmission", pair(c.bounds.system_transmission)},
                 {"noise_coeff_beta", pair(c.bounds.noise_coeff_beta)},
                 {"post_converter_transmission", pair(c.bounds.post_converter_transmission)},
                 {"insertion_transmission", pair(c.bounds.insertion_transmission)},
                 {"intrinsic_visibility_v0", pair(c.bounds.intrinsic_visibility_v0)}};
  if (c.scenario) j["scenario"] = *c.scenario;
  j["grids"] = {{"power_mw", c.grids.power_mw},     {"mu_fig4a", c.grids.mu_fig4a},
                {"mu_fig4b", c.grids.mu_fig4b},     {"mu_fig5", c.grids.mu_fig5},
                {"phi_points", c.grids.phi_points}, {"mu_fig6", c.grids.mu_fig6}};
  j["gates_per_point"] = {{"fig4a", c.gates.fig4a},
                          {"fig4b", c.gates.fig4b},
                          {"fig5", c.gates.fig5},
                          {"fig6", c.gates.fig6}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  if (c.output) j["output"] = *c.output;
  return j;
}

/// Report with fitted parameters, per-target residuals and the input config
/// with the fitted values filled in (itself a valid config).
inline Json calibration_report(const ScenarioConfig& c, const CalibrationResult& r) {
  Json report;
  report["feasible"] = r.feasible;
  report["optimizer_status"] = r.optimizer_status;
  const auto& p = r.params;
  report["fitted"] = {
      {"system_transmission", p.converter.system_transmission},
      {"noise_coeff_beta", p.converter.noise_coeff_beta},
      {"post_converter_transmission", p.post_converter_transmission},
      {"insertion_transmission", p.interferometer->insertion_transmission},
      {"transmission_product", r.transmission_product()},
      {"intrinsic_visibility_v0", p.intrinsic_visibility_v0},
  };
  Json residuals = Json::array();
  for (const auto& t : r.residuals) {
    residuals.push_back({{"name", t.name},
                         {"target", t.target},
                         {"model", t.model},
                         {"residual", t.residual()},
                         {"tolerance", t.tolerance},
                         {"within", t.within()}});
  }
  report["residuals"] = residuals;
  ScenarioConfig fitted = c;
  fitted.calibration_report.reset();
  apply_report(fitted, report);
  report["config"] = to_json(fitted);
  return report;
}

}  // namespace qfdc
