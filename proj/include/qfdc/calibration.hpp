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

// Calibration of the chain's free parameters against the published
// observables: conversion efficiency at one pump power, the two count floors
// (without / with interferometer), the high-mu fringe visibility and the raw
// and dark-subtracted visibilities at low mu.
//
// The system transmission decouples and is solved exactly. A linearized
// algebraic solution seeds a bounded Levenberg-Marquardt refinement of the
// remaining four parameters on the full nonlinear chain model.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "qfdc/error.hpp"
#include "qfdc/experiment.hpp"

namespace qfdc {

struct CalibrationTargets {
  double pump_power_w = 0.027;
  double efficiency = 0.0035;
  double efficiency_tol_rel = 1e-9;
  double floor_no_interferometer = 7e-5;
  double floor_with_interferometer = 3e-5;
  double floor_tol_rel = 0.15;
  double mu_high = 143.0;
  double visibility_high = 0.94;
  double visibility_high_tol = 0.005;
  double mu_low = 0.7;
  double visibility_raw = 0.379;
  double visibility_raw_tol = 0.011;
  double visibility_sub = 0.721;
  double visibility_sub_tol = 0.022;

  void validate() const {
    detail::require(pump_power_w > 0.0 && mu_high > 0.0 && mu_low > 0.0,
                    "calibration powers and mu values must be positive");
    detail::require(efficiency > 0.0 && floor_no_interferometer > 0.0 &&
                        floor_with_interferometer > 0.0,
                    "calibration rates must be positive");
    detail::require(efficiency_tol_rel > 0.0 && floor_tol_rel > 0.0 &&
                        visibility_high_tol > 0.0 && visibility_raw_tol > 0.0 &&
                        visibility_sub_tol > 0.0,
                    "calibration tolerances must be positive");
  }
};

struct ParameterBounds {
  double lo = 0.0;
  double hi = 1.0;

  double clamp(double x) const { return std::min(std::max(x, lo), hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct CalibrationBounds {
  ParameterBounds system_transmission{0.0, 1.0};
  ParameterBounds noise_coeff_beta{0.0, 10.0};  // photons / gate / W
  ParameterBounds post_converter_transmission{0.0, 1.0};
  ParameterBounds insertion_transmission{0.0, 1.0};
  ParameterBounds intrinsic_visibility_v0{0.0, 1.0};

  void validate() const {
    for (const auto* b : {&system_transmission, &noise_coeff_beta,
                          &post_converter_transmission, &insertion_transmission,
                          &intrinsic_visibility_v0}) {
      detail::require(std::isfinite(b->lo) && std::isfinite(b->hi) && b->lo < b->hi,
                      "calibration bounds must satisfy lo < hi");
    }
    detail::require(system_transmission.lo >= 0.0 && system_transmission.hi <= 1.0 &&
                        post_converter_transmission.lo >= 0.0 &&
                        post_converter_transmission.hi <= 1.0 &&
                        insertion_transmission.lo >= 0.0 &&
                        insertion_transmission.hi <= 1.0 &&
                        intrinsic_visibility_v0.lo >= 0.0 &&
                        intrinsic_visibility_v0.hi <= 1.0 && noise_coeff_beta.lo >= 0.0,
                    "calibration bounds exceed the physical parameter ranges");
  }
};

struct TargetResidual {
  std::string name;
  double target = 0.0;
  double model = 0.0;
  double tolerance = 0.0;  // absolute

  double residual() const { return model - target; }
  bool within() const { return std::isfinite(model) && std::abs(residual()) <= tolerance; }
};

struct CalibrationResult {
  ChainParams params;
  std::vector<TargetResidual> residuals;
  bool feasible = false;
  int optimizer_status = 0;

  double transmission_product() const {
    return params.post_converter_transmission * params.interferometer->insertion_transmission;
  }
};

/// Observables predicted by a chain for the calibration targets' settings.
inline std::vector<TargetResidual> evaluate_targets(const ChainParams& params,
                                                    const CalibrationTargets& t) {
  detail::require(params.interferometer.has_value(), "calibration needs an interferometer");
  const auto at_pump = params.with_pump_power(t.pump_power_w);
  const auto open = at_pump.without_interferometer();
  const double eff = conversion_efficiency(at_pump.converter);
  const double floor_open = expected_rate(0.0, std::nullopt, open).click_probability;
  const double floor_ifm = expected_rate(0.0, std::nullopt, at_pump).click_probability;
  const double v_high = analytic_visibility(t.mu_high, at_pump).raw;
  const auto v_low = analytic_visibility(t.mu_low, at_pump);
  return {
      {"efficiency", t.efficiency, eff, t.efficiency_tol_rel * t.efficiency},
      {"floor_no_interferometer", t.floor_no_interferometer, floor_open,
       t.floor_tol_rel * t.floor_no_interferometer},
      {"floor_with_interferometer", t.floor_with_interferometer, floor_ifm,
       t.floor_tol_rel * t.floor_with_interferometer},
      {"visibility_high_mu", t.visibility_high, v_high, t.visibility_high_tol},
      {"visibility_raw", t.visibility_raw, v_low.raw, t.visibility_raw_tol},
      {"visibility_subtracted", t.visibility_sub, v_low.subtracted, t.visibility_sub_tol},
  };
}

/// Targets that a given chain reproduces exactly (tolerances copied from tmpl).
inline CalibrationTargets targets_from(const ChainParams& params, CalibrationTargets tmpl) {
  const auto r = evaluate_targets(params, tmpl);
  tmpl.efficiency = r[0].model;
  tmpl.floor_no_interferometer = r[1].model;
  tmpl.floor_with_interferometer = r[2].model;
  tmpl.visibility_high = r[3].model;
  tmpl.visibility_raw = r[4].model;
  tmpl.visibility_sub = r[5].model;
  return tmpl;
}

struct SignalNoiseSplit {
  double signal_clicks = 0.0;  // peak signal clicks per gate
  double noise_clicks = 0.0;   // noise clicks per gate, dark counts excluded
};

/// Low-flux inversion of a raw / dark-subtracted visibility pair. With
/// r = V_raw / V_sub the dark counts d fix X = S + 2 B_noise = 2 d r / (1 - r);
/// then S = V_sub X / V0.
inline SignalNoiseSplit split_signal_noise(double v_raw, double v_sub, double dark, double v0) {
  const double r = v_raw / v_sub;
  const double x = 2.0 * dark * r / (1.0 - r);
  SignalNoiseSplit s;
  s.signal_clicks = v_sub * x / v0;
  s.noise_clicks = (x - s.signal_clicks) / 2.0;
  return s;
}

/// Linearized solution used to seed the nonlinear fit.
struct LinearizedSolution {
  double signal_clicks = 0.0;  // peak signal clicks per gate at mu_low
  double noise_clicks = 0.0;   // noise clicks per gate behind the interferometer
  double v0 = 0.0;
  double system_transmission = 0.0;
  double noise_coeff_beta = 0.0;
  double post_converter_transmission = 0.0;
  double insertion_transmission = 0.0;
};

inline LinearizedSolution presolve(const ChainParams& base, const CalibrationTargets& t) {
  t.validate();
  detail::require(base.interferometer.has_value(), "calibration needs an interferometer");
  const auto& det = base.detector;
  const double d = det.dark_prob_per_gate;
  const double e = det.efficiency;
  const auto at_pump = base.with_pump_power(t.pump_power_w);

  LinearizedSolution s;
  s.system_transmission = t.efficiency / interaction_efficiency(at_pump.converter);

  // V0 from the high-mu fringe, corrected for its small background share.
  s.v0 = t.visibility_high;
  for (int iter = 0; iter < 4; ++iter) {
    const auto split = split_signal_noise(t.visibility_raw, t.visibility_sub, d, s.v0);
    const double high = split.signal_clicks * t.mu_high / t.mu_low;
    s.v0 = t.visibility_high * (high + 2.0 * (split.noise_clicks + d)) / high;
  }
  const auto split = split_signal_noise(t.visibility_raw, t.visibility_sub, d, s.v0);
  s.signal_clicks = split.signal_clicks;
  s.noise_clicks = split.noise_clicks;

  // Noise photons at the detector: open chain from the first floor, the
  // interferometer's share from the second.
  const double open_noise = -std::log((1.0 - t.floor_no_interferometer) / (1.0 - d)) / e;
  const double ifm_noise = -std::log((1.0 - t.floor_with_interferometer) / (1.0 - d)) / e;
  const auto& ifm = *base.interferometer;
  const double leak = base.converter.leak_fraction;
  const double share = leak * power_transmission_db(ifm.oob_suppression_db) + (1.0 - leak) / 2.0;
  s.insertion_transmission = ifm_noise / (open_noise * share);

  const double product =
      s.signal_clicks / (e * t.mu_low * t.efficiency);  // post * insertion
  s.post_converter_transmission = product / s.insertion_transmission;
  s.noise_coeff_beta = open_noise / (t.pump_power_w * s.post_converter_transmission);
  return s;
}

namespace detail {

// Parameters live in [lo, hi] through p = lo + (hi - lo) sin^2(u).
inline double from_unbounded(double u, const ParameterBounds& b) {
  const double s = std::sin(u);
  return b.lo + (b.hi - b.lo) * s * s;
}

inline double to_unbounded(double p, const ParameterBounds& b) {
  const double margin = 1e-6 * (b.hi - b.lo);
  if (!std::isfinite(p)) p = 0.5 * (b.lo + b.hi);
  const double q = (std::min(std::max(p, b.lo + margin), b.hi - margin) - b.lo) / (b.hi - b.lo);
  return std::asin(std::sqrt(q));
}

struct CalibrationFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  ChainParams base;
  CalibrationTargets targets;
  CalibrationBounds bounds;

  int inputs() const { return 4; }
  int values() const { return 5; }

  ChainParams apply(const Eigen::VectorXd& u) const {
    ChainParams p = base;
    p.converter.noise_coeff_beta = from_unbounded(u[0], bounds.noise_coeff_beta);
    p.post_converter_transmission = from_unbounded(u[1], bounds.post_converter_transmission);
    p.interferometer->insertion_transmission = from_unbounded(u[2], bounds.insertion_transmission);
    p.intrinsic_visibility_v0 = from_unbounded(u[3], bounds.intrinsic_visibility_v0);
    return p;
  }

  int operator()(const Eigen::VectorXd& u, Eigen::VectorXd& fvec) const {
    const auto r = evaluate_targets(apply(u), targets);
    for (int i = 0; i < 5; ++i) fvec[i] = r[i + 1].residual() / r[i + 1].tolerance;
    return 0;
  }
};

}  // namespace detail

/// Fits the free chain parameters to the targets. The remaining chain fields
/// (detector, eta_nor, leak fraction, filter rejection, phase bias) are taken
/// from base. feasible is false when any target misses its tolerance; the
/// best-fit parameters and residuals are returned either way.
inline CalibrationResult calibrate(const ChainParams& base, const CalibrationTargets& targets,
                                   const CalibrationBounds& bounds = {}) {
  targets.validate();
  bounds.validate();
  base.validate();
  detail::require(base.interferometer.has_value(), "calibration needs an interferometer");

  const auto seed = presolve(base, targets);
  detail::CalibrationFunctor functor{base.with_pump_power(targets.pump_power_w), targets, bounds};
  functor.base.converter.system_transmission =
      bounds.system_transmission.clamp(seed.system_transmission);

  Eigen::VectorXd u(4);
  u << detail::to_unbounded(seed.noise_coeff_beta, bounds.noise_coeff_beta),
      detail::to_unbounded(seed.post_converter_transmission, bounds.post_converter_transmission),
      detail::to_unbounded(seed.insertion_transmission, bounds.insertion_transmission),
      detail::to_unbounded(seed.v0, bounds.intrinsic_visibility_v0);

  Eigen::NumericalDiff<detail::CalibrationFunctor, Eigen::Central> diff(functor);
  Eigen::LevenbergMarquardt<decltype(diff), double> lm(diff);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.maxfev = 4000;
  const int status = lm.minimize(u);

  auto fitted = functor.apply(u);
  fitted.converter.pump_power_w = base.converter.pump_power_w;
  CalibrationResult result{fitted, evaluate_targets(fitted, targets), true, status};
  for (const auto& r : result.residuals) result.feasible = result.feasible && r.within();
  return result;
}

}  // namespace qfdc
