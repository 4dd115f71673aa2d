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

// Calibrated reference chain shared by the tests. The fitted numbers come from
// tests/oracles/calibration_oracle.py (scipy least_squares on the same
// observables), not from qfdc::calibrate.

#pragma once

#include "qfdc/experiment.hpp"

namespace qfdc::testing {

inline constexpr double kOracleSystemTransmission = 0.065994190303725956;
inline constexpr double kOracleBeta = 0.09286653;
inline constexpr double kOraclePostTransmission = 0.17718281;
inline constexpr double kOracleInsertion = 1.0;
inline constexpr double kOracleV0 = 0.94801574;

inline ChainParams reference_chain() {
  ConverterSpec conv{derive_process(mode_from_wavelength(1551.1), mode_from_wavelength(712.9))};
  conv.eta_nor = 2.0;
  conv.pump_power_w = 0.027;
  conv.system_transmission = kOracleSystemTransmission;
  conv.noise_coeff_beta = kOracleBeta;
  conv.leak_fraction = 0.8;
  InterferometerSpec ifm;
  ifm.phase_bias_theta = 0.0;
  ifm.insertion_transmission = kOracleInsertion;
  ifm.oob_suppression_db = 12.0;
  return ChainParams{conv, ifm, DetectorSpec{0.10, 2.6e-5, 4e6}, kOraclePostTransmission,
                     kOracleV0};
}

}  // namespace qfdc::testing
