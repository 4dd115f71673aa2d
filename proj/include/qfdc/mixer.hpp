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

// Chi(2) three-wave mixing with a strong CW pump.
//
// Beamsplitter-type difference frequency generation (w_p + w_c = w_s) maps
//   a_c(t) = a_c(0) cos(chi t) + a_s(0) sin(chi t),
// which on coherent inputs with a vacuum converted port is a lossless
// amplitude beamsplitter. Amplifier-type DFG (w_p = w_s + w_c) is a
// parametric amplifier and is only classified, never simulated.

#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfdc/error.hpp"
#include "qfdc/optics.hpp"

namespace qfdc {

enum class ProcessKind { BeamsplitterType, AmplifierType };

inline const char* to_string(ProcessKind kind) {
  return kind == ProcessKind::BeamsplitterType ? "beamsplitter" : "amplifier";
}

class ThreeWaveProcess {
 public:
  ThreeWaveProcess(OpticalMode pump, OpticalMode signal, OpticalMode converted,
                   ProcessKind kind)
      : pump_(pump), signal_(signal), converted_(converted), kind_(kind) {
    const double wp = pump.angular_frequency();
    const double ws = signal.angular_frequency();
    const double wc = converted.angular_frequency();
    if (kind == ProcessKind::BeamsplitterType) {
      detail::require(ws > wp && std::abs(wp + wc - ws) <= 1e-9 * ws,
                      "beamsplitter-type process requires w_p + w_c = w_s");
    } else {
      detail::require(wp > ws && std::abs(ws + wc - wp) <= 1e-9 * wp,
                      "amplifier-type process requires w_p = w_s + w_c");
    }
  }

  const OpticalMode& pump() const { return pump_; }
  const OpticalMode& signal() const { return signal_; }
  const OpticalMode& converted() const { return converted_; }
  ProcessKind kind() const { return kind_; }

 private:
  OpticalMode pump_;
  OpticalMode signal_;
  OpticalMode converted_;
  ProcessKind kind_;
};

/// Converted channel from energy conservation; the kind follows from which
/// input carries the higher frequency.
inline ThreeWaveProcess derive_process(const OpticalMode& pump, const OpticalMode& signal) {
  const double wp = pump.angular_frequency();
  const double ws = signal.angular_frequency();
  detail::require(!pump.same_channel(signal, 1e-12),
                  "pump and signal frequencies must differ");
  if (ws > wp) {
    return ThreeWaveProcess(pump, signal, OpticalMode::from_angular_frequency(ws - wp),
                            ProcessKind::BeamsplitterType);
  }
  return ThreeWaveProcess(pump, signal, OpticalMode::from_angular_frequency(wp - ws),
                          ProcessKind::AmplifierType);
}

/// True iff pump-induced SPDC photons (all below w_p) cannot fall into the
/// converted channel, i.e. w_c > w_p strictly.
inline bool spdc_leak_safe(const ThreeWaveProcess& process) {
  if (process.kind() != ProcessKind::BeamsplitterType) {
    throw UnsupportedProcess("SPDC leak check only applies to beamsplitter-type DFG");
  }
  return process.converted().angular_frequency() > process.pump().angular_frequency();
}

struct ConverterSpec {
  ThreeWaveProcess process;
  double eta_nor = 2.0;              // 1/W
  double pump_power_w = 0.027;
  double system_transmission = 1.0;  // input coupling up to waveguide output
  double noise_coeff_beta = 0.0;     // noise photons per gate per W at waveguide output
  double leak_fraction = 0.8;        // share of noise that is residual pump leakage

  void validate() const {
    detail::require(std::isfinite(eta_nor) && eta_nor >= 0.0, "eta_nor must be >= 0");
    detail::require(std::isfinite(pump_power_w) && pump_power_w >= 0.0,
                    "pump power must be >= 0");
    detail::require(system_transmission >= 0.0 && system_transmission <= 1.0,
                    "system_transmission must lie in [0, 1]");
    detail::require(std::isfinite(noise_coeff_beta) && noise_coeff_beta >= 0.0,
                    "noise_coeff_beta must be >= 0");
    detail::require(leak_fraction >= 0.0 && leak_fraction <= 1.0,
                    "leak_fraction must lie in [0, 1]");
  }

  ConverterSpec with_pump_power(double watts) const {
    ConverterSpec copy = *this;
    copy.pump_power_w = watts;
    return copy;
  }
};

/// chi*t for the given pump power, from the normalized efficiency.
inline double interaction_angle(const ConverterSpec& spec) {
  return std::sqrt(spec.eta_nor * spec.pump_power_w);
}

/// sin^2(chi t): photon-number conversion probability inside the crystal.
inline double interaction_efficiency(const ConverterSpec& spec) {
  const double s = std::sin(interaction_angle(spec));
  return s * s;
}

/// Pump power that gives chi t = pi/2 (complete conversion).
inline double full_conversion_power(double eta_nor) {
  detail::require(eta_nor > 0.0, "eta_nor must be positive");
  const double half_pi = std::numbers::pi / 2.0;
  return half_pi * half_pi / eta_nor;
}

namespace detail {
inline void require_beamsplitter(const ConverterSpec& spec) {
  if (spec.process.kind() != ProcessKind::BeamsplitterType) {
    throw UnsupportedProcess(
        "amplifier-type DFG generates SPDC noise and cannot be used for conversion");
  }
}
}  // namespace detail

/// Converted photons at the waveguide output per signal photon at the input
/// coupler: T_sys * sin^2(sqrt(eta_nor * P)).
inline double conversion_efficiency(const ConverterSpec& spec) {
  spec.validate();
  detail::require_beamsplitter(spec);
  return spec.system_transmission * interaction_efficiency(spec);
}

struct ConversionOutput {
  CoherentPulseTrain converted;  // at the waveguide output
  CoherentPulseTrain residual;   // unconverted signal, before output loss
};

/// Applies the beamsplitter map slot by slot with a vacuum converted input
/// and pump phase 0, then the lumped system transmission on the converted arm.
inline ConversionOutput convert(const CoherentPulseTrain& train, const ConverterSpec& spec) {
  spec.validate();
  detail::require_beamsplitter(spec);
  if (!train.mode().same_channel(spec.process.signal())) {
    throw InvalidArgument("pulse train is not in the converter's signal mode");
  }
  const double eta_int = interaction_efficiency(spec);
  const double to_converted = std::sqrt(eta_int) * std::sqrt(spec.system_transmission);
  const double to_residual = std::sqrt(1.0 - eta_int);

  std::vector<Amplitude> converted;
  std::vector<Amplitude> residual;
  converted.reserve(train.size());
  residual.reserve(train.size());
  for (const auto& a : train.amplitudes()) {
    converted.push_back(to_converted * a);
    residual.push_back(to_residual * a);
  }
  return {train.with(spec.process.converted(), std::move(converted)),
          train.with(train.mode(), std::move(residual))};
}

/// Mean photons per gate of incoherent pump-induced background at the
/// waveguide output, in the converted detection band.
struct NoiseBackground {
  double leak_photons_per_gate = 0.0;
  double raman_photons_per_gate = 0.0;

  double total() const { return leak_photons_per_gate + raman_photons_per_gate; }

  NoiseBackground scaled(double factor) const {
    return {leak_photons_per_gate * factor, raman_photons_per_gate * factor};
  }
};

inline NoiseBackground noise_background(const ConverterSpec& spec) {
  spec.validate();
  const double total = spec.noise_coeff_beta * spec.pump_power_w;
  return {spec.leak_fraction * total, (1.0 - spec.leak_fraction) * total};
}

}  // namespace qfdc
