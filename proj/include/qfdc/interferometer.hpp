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

// 1-bit delayed Mach-Zehnder interferometer. The arm difference equals one
// clock period, so slot k at an output port carries (a_k +/- a_{k-1} e^{i theta}) / 2.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qfdc/error.hpp"
#include "qfdc/mixer.hpp"
#include "qfdc/optics.hpp"

namespace qfdc {

struct InterferometerSpec {
  double phase_bias_theta = 0.0;
  double insertion_transmission = 1.0;
  double oob_suppression_db = 12.0;  // extra rejection of out-of-band pump light

  void validate() const {
    detail::require(std::isfinite(phase_bias_theta), "phase bias must be finite");
    detail::require(insertion_transmission >= 0.0 && insertion_transmission <= 1.0,
                    "insertion_transmission must lie in [0, 1]");
    detail::require(std::isfinite(oob_suppression_db) && oob_suppression_db >= 0.0,
                    "oob_suppression_db must be >= 0");
  }
};

enum class InterferometerPort { Constructive, Destructive };

/// Per-slot mean photon numbers at one output port. Slot 0 has no earlier
/// partner and only receives its own short-arm half amplitude.
inline std::vector<double> transmit_train(
    const CoherentPulseTrain& train, const InterferometerSpec& spec,
    InterferometerPort port = InterferometerPort::Constructive) {
  spec.validate();
  detail::require(train.size() >= 2, "interferometer needs a train of at least 2 slots");
  const auto a = train.amplitudes();
  const Amplitude bias = std::polar(1.0, spec.phase_bias_theta);
  const double sign = port == InterferometerPort::Constructive ? 1.0 : -1.0;

  std::vector<double> out(a.size());
  out[0] = spec.insertion_transmission * std::norm(a[0]) / 4.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    out[k] = spec.insertion_transmission * std::norm(a[k] + sign * a[k - 1] * bias) / 4.0;
  }
  return out;
}

/// Average output over the interfering slots (k >= 1).
inline double mean_interfering_output(const std::vector<double>& per_slot) {
  detail::require(per_slot.size() >= 2, "need at least one interfering slot");
  double sum = 0.0;
  for (std::size_t k = 1; k < per_slot.size(); ++k) sum += per_slot[k];
  return sum / static_cast<double>(per_slot.size() - 1);
}

/// Incoherent background through one port: out-of-band pump leakage takes
/// the extra filter rejection, in-band Raman light splits evenly between ports.
inline NoiseBackground suppress_background(const NoiseBackground& bg,
                                           const InterferometerSpec& spec) {
  spec.validate();
  return {bg.leak_photons_per_gate * spec.insertion_transmission *
              power_transmission_db(spec.oob_suppression_db),
          bg.raman_photons_per_gate * spec.insertion_transmission / 2.0};
}

}  // namespace qfdc
