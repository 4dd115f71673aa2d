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

// Wavelength channels and coherent pulse trains.
//
// Every state handled by the simulator is a product of coherent states, and
// every element upstream of the detector is linear, so a pulse train is fully
// described by one complex amplitude per clock slot (|alpha|^2 = mean photon
// number). Photon statistics only enter at detection.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "qfdc/error.hpp"

namespace qfdc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact

using Amplitude = std::complex<double>;

class OpticalMode {
 public:
  static OpticalMode from_wavelength_nm(double wavelength_nm) {
    detail::require(std::isfinite(wavelength_nm) && wavelength_nm > 0.0,
                    "wavelength must be positive and finite");
    return OpticalMode(wavelength_nm,
                       2.0 * std::numbers::pi * kSpeedOfLight /
                           (wavelength_nm * 1e-9));
  }

  static OpticalMode from_angular_frequency(double omega) {
    detail::require(std::isfinite(omega) && omega > 0.0,
                    "angular frequency must be positive and finite");
    return OpticalMode(2.0 * std::numbers::pi * kSpeedOfLight / omega * 1e9,
                       omega);
  }

  double wavelength_nm() const { return wavelength_nm_; }
  /// rad/s
  double angular_frequency() const { return angular_frequency_; }

  /// Same channel, compared on frequency with a relative tolerance.
  bool same_channel(const OpticalMode& other, double rel_tol = 1e-9) const {
    return std::abs(angular_frequency_ - other.angular_frequency_) <=
           rel_tol * std::max(angular_frequency_, other.angular_frequency_);
  }

 private:
  OpticalMode(double wavelength_nm, double omega)
      : wavelength_nm_(wavelength_nm), angular_frequency_(omega) {}

  double wavelength_nm_;
  double angular_frequency_;
};

inline OpticalMode mode_from_wavelength(double wavelength_nm) {
  return OpticalMode::from_wavelength_nm(wavelength_nm);
}

/// Per-slot phase modulation. Alternating(phi) expands to 0, phi, 0, phi, ...
class PhasePattern {
 public:
  struct Alternating {
    double phi;
  };
  struct Uniform {
    double phi;
  };
  struct Explicit {
    std::vector<double> phases;
  };

  static PhasePattern alternating(double phi) { return PhasePattern(Alternating{phi}); }
  static PhasePattern uniform(double phi = 0.0) { return PhasePattern(Uniform{phi}); }
  static PhasePattern explicit_phases(std::vector<double> phases) {
    return PhasePattern(Explicit{std::move(phases)});
  }

  /// Phases for a train of n slots. Explicit patterns must match n exactly.
  std::vector<double> expand(std::size_t n) const {
    std::vector<double> out(n);
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Alternating>) {
            for (std::size_t k = 0; k < n; ++k) out[k] = (k % 2 == 0) ? 0.0 : p.phi;
          } else if constexpr (std::is_same_v<T, Uniform>) {
            std::fill(out.begin(), out.end(), p.phi);
          } else {
            detail::require(p.phases.size() == n,
                            "explicit phase pattern length does not match train");
            out = p.phases;
          }
        },
        kind_);
    return out;
  }

  const auto& kind() const { return kind_; }

 private:
  explicit PhasePattern(std::variant<Alternating, Uniform, Explicit> kind)
      : kind_(std::move(kind)) {}

  std::variant<Alternating, Uniform, Explicit> kind_;
};

/// A clocked train of coherent pulses in one optical mode.
class CoherentPulseTrain {
 public:
  CoherentPulseTrain(OpticalMode mode, std::vector<Amplitude> amplitudes,
                     double clock_period_ns = 1.0, double pulse_width_ps = 100.0)
      : mode_(mode),
        amplitudes_(std::move(amplitudes)),
        clock_period_ns_(clock_period_ns),
        pulse_width_ps_(pulse_width_ps) {
    detail::require(!amplitudes_.empty(), "pulse train must have at least one slot");
    detail::require(clock_period_ns_ > 0.0 && pulse_width_ps_ > 0.0,
                    "clock period and pulse width must be positive");
    for (const auto& a : amplitudes_) {
      detail::require(std::isfinite(a.real()) && std::isfinite(a.imag()),
                      "pulse amplitudes must be finite");
    }
  }

  const OpticalMode& mode() const { return mode_; }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  std::size_t size() const { return amplitudes_.size(); }
  double clock_period_ns() const { return clock_period_ns_; }
  double pulse_width_ps() const { return pulse_width_ps_; }

  /// Mean photon number of slot k.
  double photons(std::size_t k) const { return std::norm(amplitudes_.at(k)); }

  /// Average of |alpha_k|^2 over all slots (mu).
  double mean_photon_number() const {
    double sum = 0.0;
    for (const auto& a : amplitudes_) sum += std::norm(a);
    return sum / static_cast<double>(amplitudes_.size());
  }

  /// Same clock and pulse metadata, new mode and amplitudes.
  CoherentPulseTrain with(OpticalMode mode, std::vector<Amplitude> amplitudes) const {
    return CoherentPulseTrain(mode, std::move(amplitudes), clock_period_ns_,
                              pulse_width_ps_);
  }

 private:
  OpticalMode mode_;
  std::vector<Amplitude> amplitudes_;
  double clock_period_ns_;
  double pulse_width_ps_;
};

/// Idealized phase-modulated attenuated source: every slot carries mean
/// photon number mu, with phases set by the pattern.
inline CoherentPulseTrain coherent_train(const OpticalMode& mode, std::size_t n_slots,
                                         double mu, const PhasePattern& pattern) {
  detail::require(n_slots >= 1, "pulse train must have at least one slot");
  detail::require(std::isfinite(mu) && mu >= 0.0, "mean photon number must be >= 0");
  const double magnitude = std::sqrt(mu);
  const auto phases = pattern.expand(n_slots);
  std::vector<Amplitude> amplitudes(n_slots);
  for (std::size_t k = 0; k < n_slots; ++k) {
    amplitudes[k] = std::polar(magnitude, phases[k]);
  }
  return CoherentPulseTrain(mode, std::move(amplitudes));
}

/// Amplitude transmission of a loss in dB.
inline double amplitude_transmission_db(double loss_db) {
  return std::pow(10.0, -loss_db / 20.0);
}

/// Power (photon-number) transmission of a loss in dB.
inline double power_transmission_db(double loss_db) {
  return std::pow(10.0, -loss_db / 10.0);
}

/// Scales every amplitude by sqrt(transmission). transmission in [0, 1].
inline CoherentPulseTrain transmit(const CoherentPulseTrain& train, double transmission) {
  detail::require(transmission >= 0.0 && transmission <= 1.0,
                  "transmission must lie in [0, 1]");
  const double scale = std::sqrt(transmission);
  std::vector<Amplitude> out(train.amplitudes().begin(), train.amplitudes().end());
  for (auto& a : out) a *= scale;
  return train.with(train.mode(), std::move(out));
}

inline CoherentPulseTrain attenuate(const CoherentPulseTrain& train, double loss_db) {
  detail::require(std::isfinite(loss_db) && loss_db >= 0.0, "loss must be >= 0 dB");
  const double scale = amplitude_transmission_db(loss_db);
  std::vector<Amplitude> out(train.amplitudes().begin(), train.amplitudes().end());
  for (auto& a : out) a *= scale;
  return train.with(train.mode(), std::move(out));
}

inline CoherentPulseTrain apply_phase(const CoherentPulseTrain& train,
                                      const PhasePattern& pattern) {
  const auto phases = pattern.expand(train.size());
  std::vector<Amplitude> out(train.amplitudes().begin(), train.amplitudes().end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= std::polar(1.0, phases[k]);
  return train.with(train.mode(), std::move(out));
}

}  // namespace qfdc
