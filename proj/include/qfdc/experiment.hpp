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

// End-to-end optical chain: source -> converter -> collection optics ->
// (optional) delay interferometer -> gated detector, evaluated either in
// closed form or by Monte Carlo click sampling, plus the four measurement
// scenarios built on top of it.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "qfdc/detector.hpp"
#include "qfdc/error.hpp"
#include "qfdc/fit.hpp"
#include "qfdc/interferometer.hpp"
#include "qfdc/mixer.hpp"
#include "qfdc/optics.hpp"
#include "qfdc/random.hpp"

namespace qfdc {

struct ChainParams {
  ConverterSpec converter;
  std::optional<InterferometerSpec> interferometer;
  DetectorSpec detector;
  /// Waveguide output to interferometer input (lenses, fiber, WDM pump filters).
  double post_converter_transmission = 1.0;
  /// Background-free fringe visibility of the apparatus.
  double intrinsic_visibility_v0 = 1.0;

  void validate() const {
    converter.validate();
    if (interferometer) interferometer->validate();
    detector.validate();
    detail::require(post_converter_transmission >= 0.0 && post_converter_transmission <= 1.0,
                    "post_converter_transmission must lie in [0, 1]");
    detail::require(intrinsic_visibility_v0 >= 0.0 && intrinsic_visibility_v0 <= 1.0,
                    "intrinsic_visibility_v0 must lie in [0, 1]");
  }

  ChainParams without_interferometer() const {
    ChainParams copy = *this;
    copy.interferometer.reset();
    return copy;
  }

  ChainParams with_pump_power(double watts) const {
    ChainParams copy = *this;
    copy.converter.pump_power_w = watts;
    return copy;
  }
};

/// Incoherent background photons per gate reaching the detector.
inline double background_at_detector(const ChainParams& params) {
  auto bg = noise_background(params.converter).scaled(params.post_converter_transmission);
  if (params.interferometer) bg = suppress_background(bg, *params.interferometer);
  return bg.total();
}

/// Converted signal photons per gate entering the interferometer (or the
/// detector when there is none), before any interference.
inline double signal_before_interferometer(double mu, const ChainParams& params) {
  return mu * conversion_efficiency(params.converter) * params.post_converter_transmission;
}

struct ExpectedRate {
  double signal_photons = 0.0;      // at the detector, gate average
  double background_photons = 0.0;  // at the detector
  double mean_photons = 0.0;
  double click_probability = 0.0;
};

/// Closed-form rates for the alternating(phi) train. Without phi the train is
/// unmodulated. With a phase bias theta the two slot parities see
/// (1 + V0 cos(phi +/- theta)) / 2, and the click probability averages both.
inline ExpectedRate expected_rate(double mu, std::optional<double> phi,
                                  const ChainParams& params) {
  params.validate();
  detail::require(std::isfinite(mu) && mu >= 0.0, "mean photon number must be >= 0");
  if (phi && !params.interferometer) {
    throw InvalidArgument("a signal phase needs an interferometer in the chain");
  }
  ExpectedRate r;
  r.background_photons = background_at_detector(params);
  const double incident = signal_before_interferometer(mu, params);
  if (!params.interferometer) {
    r.signal_photons = incident;
    r.mean_photons = r.signal_photons + r.background_photons;
    r.click_probability = click_probability(r.mean_photons, params.detector);
    return r;
  }
  const auto& ifm = *params.interferometer;
  const double v0 = params.intrinsic_visibility_v0;
  const double p = phi.value_or(0.0);
  const double theta = ifm.phase_bias_theta;
  const double even = incident * ifm.insertion_transmission * (1.0 + v0 * std::cos(p + theta)) / 2.0;
  const double odd = incident * ifm.insertion_transmission * (1.0 + v0 * std::cos(p - theta)) / 2.0;
  r.signal_photons = (even + odd) / 2.0;
  r.mean_photons = r.signal_photons + r.background_photons;
  r.click_probability = 0.5 * (click_probability(even + r.background_photons, params.detector) +
                               click_probability(odd + r.background_photons, params.detector));
  return r;
}

struct VisibilityPair {
  double raw = 0.0;
  double subtracted = 0.0;  // detector dark counts removed
};

/// Fringe visibility c1/c0 of the click probability over a full phase scan,
/// including noise photons, dark counts and detector saturation. With
/// x(phi) = a + b cos(phi) photoelectrons, the Fourier coefficients of
/// 1 - (1-d) exp(-x) are c0 = 1 - (1-d) e^-a I0(b) and c1 = 2 (1-d) e^-a I1(b).
inline VisibilityPair analytic_visibility(double mu, const ChainParams& params) {
  params.validate();
  detail::require(params.interferometer.has_value(), "visibility needs an interferometer");
  detail::require(std::isfinite(mu) && mu >= 0.0, "mean photon number must be >= 0");
  const auto& ifm = *params.interferometer;
  const double d = params.detector.dark_prob_per_gate;
  const double eff = params.detector.efficiency;
  const double peak = signal_before_interferometer(mu, params) * ifm.insertion_transmission;
  const double a = eff * (background_at_detector(params) + peak / 2.0);
  const double b = eff * peak * params.intrinsic_visibility_v0 / 2.0;
  const double scale = (1.0 - d) * std::exp(-a);
  const double c0 = 1.0 - scale * std::cyl_bessel_i(0.0, b);
  const double c1 = 2.0 * scale * std::cyl_bessel_i(1.0, b) * std::cos(ifm.phase_bias_theta);
  VisibilityPair v;
  if (c0 <= 0.0) return v;
  v.raw = c1 / c0;
  v.subtracted = c0 - d > 0.0 ? c1 / (c0 - d) : 0.0;
  return v;
}

/// Low-flux form S V0 / (S + 2B), S the peak signal clicks per gate and B the
/// background clicks per gate.
inline double linearized_visibility(double signal_clicks, double background_clicks,
                                    double v0) {
  const double denom = signal_clicks + 2.0 * background_clicks;
  return denom > 0.0 ? signal_clicks * v0 / denom : 0.0;
}

// ---------------------------------------------------------------------------
// Monte Carlo chain

// 1000 interfering slots, balanced between the two alternating parities.
inline constexpr std::size_t kDefaultTrainSlots = 1001;

/// Mean photons at the detector for every counted slot, propagated through
/// the amplitude chain. A fraction V0 of the light interferes; the rest
/// splits incoherently between the two ports.
inline std::vector<double> detected_slot_photons(double mu, std::optional<double> phi,
                                                 const ChainParams& params,
                                                 std::size_t n_slots = kDefaultTrainSlots) {
  params.validate();
  if (phi && !params.interferometer) {
    throw InvalidArgument("a signal phase needs an interferometer in the chain");
  }
  const auto pattern = PhasePattern::alternating(phi.value_or(0.0));
  const auto source = coherent_train(params.converter.process.signal(), n_slots, mu, pattern);
  const auto converted =
      transmit(convert(source, params.converter).converted, params.post_converter_transmission);
  const double background = background_at_detector(params);

  std::vector<double> out;
  if (!params.interferometer) {
    out.reserve(converted.size());
    for (std::size_t k = 0; k < converted.size(); ++k) {
      out.push_back(converted.photons(k) + background);
    }
    return out;
  }
  const auto& ifm = *params.interferometer;
  const double v0 = params.intrinsic_visibility_v0;
  const auto coherent = transmit_train(converted, ifm);
  out.reserve(converted.size() - 1);
  for (std::size_t k = 1; k < converted.size(); ++k) {
    const double incoherent =
        ifm.insertion_transmission * (converted.photons(k) + converted.photons(k - 1)) / 4.0;
    out.push_back(v0 * coherent[k] + (1.0 - v0) * incoherent + background);
  }
  return out;
}

/// Click probability of a gate that lands on a uniformly chosen counted slot.
inline double gate_click_probability(std::span<const double> slot_photons,
                                     const DetectorSpec& detector) {
  detail::require(!slot_photons.empty(), "no counted slots");
  double sum = 0.0;
  for (double n : slot_photons) sum += click_probability(n, detector);
  return sum / static_cast<double>(slot_photons.size());
}

struct RunOptions {
  std::uint64_t gates_per_point = 40'000'000;  // 10 s at 4 MHz
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t train_slots = kDefaultTrainSlots;
};

/// One Monte Carlo measurement of a chain setting.
inline CountSummary simulate_point(double mu, std::optional<double> phi,
                                   const ChainParams& params, std::uint64_t gates,
                                   std::uint64_t seed, unsigned threads = 0,
                                   std::size_t train_slots = kDefaultTrainSlots) {
  const auto slots = detected_slot_photons(mu, phi, params, train_slots);
  const double p = gate_click_probability(slots, params.detector);
  return CountSummary::from_counts(gates, sample_clicks(p, gates, seed, threads),
                                   params.detector.gate_rate_hz);
}

/// Detector run with no light at all.
inline CountSummary simulate_dark(const DetectorSpec& detector, std::uint64_t gates,
                                  std::uint64_t seed, unsigned threads = 0) {
  return sample_gates(0.0, detector, gates, seed, threads);
}

namespace detail {
enum ScenarioTag : std::uint64_t { kFig4a = 0x4a, kFig4b = 0x4b, kFig5 = 0x5, kFig6 = 0x6 };

inline void require_no_interferometer(const ChainParams& params) {
  require(!params.interferometer.has_value(),
          "this scenario measures without the interferometer");
}

// Photoelectrons implied by a click probability relative to a reference
// probability: -ln((1 - p) / (1 - p_ref)), with first-order error.
struct Photoelectrons {
  double value;
  double sigma;
};
inline Photoelectrons invert_clicks(double p, double sigma_p, double p_ref, double sigma_ref) {
  const double value = -std::log((1.0 - p) / (1.0 - p_ref));
  const double dp = sigma_p / (1.0 - p);
  const double dref = sigma_ref / (1.0 - p_ref);
  return {value, std::hypot(dp, dref)};
}
}  // namespace detail

inline std::vector<double> phase_grid(std::size_t n) {
  detail::require(n >= 1, "phase grid needs at least one point");
  std::vector<double> phis(n);
  for (std::size_t i = 0; i < n; ++i) {
    phis[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
  }
  return phis;
}

// ---------------------------------------------------------------------------
// Conversion efficiency and noise versus pump power

struct EfficiencyPoint {
  double pump_power_w = 0.0;
  CountSummary signal_on;
  CountSummary signal_off;
  double efficiency = 0.0;  // estimated from counts
  double efficiency_sigma = 0.0;
  double noise_photons = 0.0;  // per gate at the waveguide output
  double noise_sigma = 0.0;
  double expected_efficiency = 0.0;
  double expected_noise = 0.0;
};

struct EfficiencyScan {
  double mu = 0.0;
  std::vector<EfficiencyPoint> points;
  std::optional<ProportionalFit> noise_fit;  // noise photons versus pump power
};

/// For each pump power: one run with the signal on and one with it off.
/// Counts are inverted through the known detector and collection optics to
/// photons at the waveguide output.
inline EfficiencyScan run_fig4a(std::span<const double> pump_powers_w, double mu,
                                const ChainParams& params, const RunOptions& options) {
  detail::require_no_interferometer(params);
  detail::require(mu > 0.0, "efficiency scan needs a signal");
  params.validate();
  const double eff = params.detector.efficiency;
  const double collect = params.post_converter_transmission;
  detail::require(eff > 0.0 && collect > 0.0,
                  "efficiency cannot be inferred through a zero-transmission chain");
  const double dark = params.detector.dark_prob_per_gate;

  EfficiencyScan scan;
  scan.mu = mu;
  std::vector<double> xs, ys, sig;
  for (std::size_t i = 0; i < pump_powers_w.size(); ++i) {
    const auto chain = params.with_pump_power(pump_powers_w[i]);
    EfficiencyPoint pt;
    pt.pump_power_w = pump_powers_w[i];
    pt.signal_on = simulate_point(mu, std::nullopt, chain, options.gates_per_point,
                                  rng::derive_seed(options.seed, {detail::kFig4a, i, 0}),
                                  options.threads, options.train_slots);
    pt.signal_off = simulate_point(0.0, std::nullopt, chain, options.gates_per_point,
                                   rng::derive_seed(options.seed, {detail::kFig4a, i, 1}),
                                   options.threads, options.train_slots);

    const auto sig_pe = detail::invert_clicks(pt.signal_on.p_click, pt.signal_on.sigma_p,
                                              pt.signal_off.p_click, pt.signal_off.sigma_p);
    pt.efficiency = sig_pe.value / (eff * collect * mu);
    pt.efficiency_sigma = sig_pe.sigma / (eff * collect * mu);

    const auto noise_pe =
        detail::invert_clicks(pt.signal_off.p_click, pt.signal_off.sigma_p, dark, 0.0);
    pt.noise_photons = noise_pe.value / (eff * collect);
    pt.noise_sigma = noise_pe.sigma / (eff * collect);

    pt.expected_efficiency = conversion_efficiency(chain.converter);
    pt.expected_noise = noise_background(chain.converter).total();
    scan.points.push_back(pt);

    if (pt.pump_power_w > 0.0 && pt.noise_sigma > 0.0) {
      xs.push_back(pt.pump_power_w);
      ys.push_back(pt.noise_photons);
      sig.push_back(pt.noise_sigma);
    }
  }
  if (!xs.empty()) scan.noise_fit = fit_through_origin(xs, ys, sig);
  return scan;
}

// ---------------------------------------------------------------------------
// Output count rate versus input mean photon number

struct CountRatePoint {
  double mu = 0.0;
  CountSummary raw;
  CorrectedRate subtracted;
  double fit_line = 0.0;
  double expected_p = 0.0;
};

struct CountRateScan {
  CountSummary floor;  // signal off, pump on
  std::vector<CountRatePoint> points;
  ProportionalFit fit;  // noise-subtracted clicks versus mu
  /// Click probability per unit mu in the low-flux limit.
  double expected_slope = 0.0;
};

inline CountRateScan run_fig4b(std::span<const double> mus, const ChainParams& params,
                               const RunOptions& options) {
  detail::require_no_interferometer(params);
  detail::require(!mus.empty(), "count-rate scan needs at least one mu");
  params.validate();

  CountRateScan scan;
  scan.floor = simulate_point(0.0, std::nullopt, params, options.gates_per_point,
                              rng::derive_seed(options.seed, {detail::kFig4b, 0xff}),
                              options.threads, options.train_slots);
  std::vector<double> xs, ys, sig;
  for (std::size_t i = 0; i < mus.size(); ++i) {
    CountRatePoint pt;
    pt.mu = mus[i];
    pt.raw = simulate_point(pt.mu, std::nullopt, params, options.gates_per_point,
                            rng::derive_seed(options.seed, {detail::kFig4b, i}),
                            options.threads, options.train_slots);
    pt.subtracted = dark_subtract(pt.raw, scan.floor);
    pt.expected_p = expected_rate(pt.mu, std::nullopt, params).click_probability;
    scan.points.push_back(pt);
    xs.push_back(pt.mu);
    ys.push_back(pt.subtracted.p);
    sig.push_back(pt.subtracted.sigma);
  }
  scan.fit = fit_through_origin(xs, ys, sig);
  for (auto& pt : scan.points) pt.fit_line = scan.fit(pt.mu);
  const double floor_p = expected_rate(0.0, std::nullopt, params).click_probability;
  scan.expected_slope = (1.0 - floor_p) * params.detector.efficiency *
                        signal_before_interferometer(1.0, params);
  return scan;
}

// ---------------------------------------------------------------------------
// Fringe scan versus signal phase modulation

struct FringePoint {
  double phi = 0.0;
  CountSummary counts;
  double expected_p = 0.0;
};

struct FringeScan {
  double mu = 0.0;
  bool with_interferometer = true;
  std::vector<FringePoint> points;
  CountSummary dark;  // detector-only reference run
  SinusoidFit fit;
  SinusoidFit fit_dark_subtracted;

  double visibility() const { return fit.visibility(); }
  double visibility_sigma() const { return fit.visibility_sigma(); }
  double visibility_subtracted() const { return fit_dark_subtracted.visibility(); }
  double visibility_subtracted_sigma() const { return fit_dark_subtracted.visibility_sigma(); }
};

namespace detail {
inline FringeScan fringe_scan(double mu, std::span<const double> phis, const ChainParams& params,
                              const RunOptions& options, std::uint64_t seed) {
  require(phis.size() >= 4, "fringe scan needs at least 4 phase points");
  params.validate();
  FringeScan scan;
  scan.mu = mu;
  scan.with_interferometer = params.interferometer.has_value();
  std::vector<double> ys, sig;
  for (std::size_t j = 0; j < phis.size(); ++j) {
    // Without the interferometer the phase modulation has no intensity effect.
    const std::optional<double> phi =
        scan.with_interferometer ? std::optional<double>(phis[j]) : std::nullopt;
    FringePoint pt;
    pt.phi = phis[j];
    pt.counts = simulate_point(mu, phi, params, options.gates_per_point,
                               rng::derive_seed(seed, {j}), options.threads, options.train_slots);
    pt.expected_p = expected_rate(mu, phi, params).click_probability;
    ys.push_back(pt.counts.p_click);
    sig.push_back(pt.counts.sigma_p);
    scan.points.push_back(pt);
  }
  scan.dark = simulate_dark(params.detector, options.gates_per_point,
                            rng::derive_seed(seed, {0xda4c}), options.threads);
  scan.fit = fit_sinusoid(phis, ys, sig);
  scan.fit_dark_subtracted =
      scan.fit.minus_constant(scan.dark.p_click, scan.dark.sigma_p * scan.dark.sigma_p);
  return scan;
}
}  // namespace detail

/// Click rates over a phase grid, fitted to c0 + c1 cos(phi). A chain
/// without interferometer gives the intensity-modulation control run.
inline FringeScan run_fig5(double mu, std::span<const double> phis, const ChainParams& params,
                           const RunOptions& options) {
  return detail::fringe_scan(mu, phis, params, options,
                             rng::derive_seed(options.seed, {detail::kFig5}));
}

// ---------------------------------------------------------------------------
// Visibility versus mean photon number

struct VisibilityPoint {
  double mu = 0.0;
  double v_raw = 0.0;
  double sigma_raw = 0.0;
  double v_sub = 0.0;
  double sigma_sub = 0.0;
  VisibilityPair analytic;
  bool detectable = false;  // raw visibility more than 3 sigma above zero
};

struct VisibilityScan {
  std::vector<VisibilityPoint> points;
  std::optional<double> smallest_detectable_mu;
};

inline VisibilityScan run_fig6(std::span<const double> mus, const ChainParams& params,
                               const RunOptions& options, std::size_t phi_points = 16) {
  detail::require(params.interferometer.has_value(), "visibility scan needs an interferometer");
  const auto phis = phase_grid(phi_points);
  VisibilityScan scan;
  for (std::size_t i = 0; i < mus.size(); ++i) {
    const auto fringe = detail::fringe_scan(
        mus[i], phis, params, options, rng::derive_seed(options.seed, {detail::kFig6, i}));
    VisibilityPoint pt;
    pt.mu = mus[i];
    pt.v_raw = fringe.visibility();
    pt.sigma_raw = fringe.visibility_sigma();
    pt.v_sub = fringe.visibility_subtracted();
    pt.sigma_sub = fringe.visibility_subtracted_sigma();
    pt.analytic = analytic_visibility(pt.mu, params);
    pt.detectable = pt.v_raw > 3.0 * pt.sigma_raw;
    if (pt.detectable &&
        (!scan.smallest_detectable_mu || pt.mu < *scan.smallest_detectable_mu)) {
      scan.smallest_detectable_mu = pt.mu;
    }
    scan.points.push_back(pt);
  }
  return scan;
}

}  // namespace qfdc
