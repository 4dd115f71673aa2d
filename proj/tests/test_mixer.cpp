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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qfdc/mixer.hpp"

using Catch::Approx;
using namespace qfdc;

namespace {

constexpr double kPi = std::numbers::pi;

ThreeWaveProcess reference_process() {
  return derive_process(mode_from_wavelength(1551.1), mode_from_wavelength(712.9));
}

ConverterSpec reference_converter(double system_transmission = 1.0) {
  ConverterSpec spec{reference_process()};
  spec.eta_nor = 2.0;
  spec.pump_power_w = 0.027;
  spec.system_transmission = system_transmission;
  spec.noise_coeff_beta = 0.1;
  spec.leak_fraction = 0.8;
  return spec;
}

}  // namespace

TEST_CASE("derive_process on the reference wavelengths") {
  const auto p = reference_process();
  CHECK(p.kind() == ProcessKind::BeamsplitterType);
  // 1 / (1/712.9 - 1/1551.1), mpmath oracle.
  CHECK(p.converted().wavelength_nm() == Approx(1319.2307205917442).epsilon(1e-12));
  CHECK(p.pump().angular_frequency() + p.converted().angular_frequency() ==
        Approx(p.signal().angular_frequency()).epsilon(1e-12));
  CHECK(spdc_leak_safe(p));
}

TEST_CASE("pump above the signal frequency is amplifier-type") {
  const auto p = derive_process(mode_from_wavelength(712.9), mode_from_wavelength(1551.1));
  CHECK(p.kind() == ProcessKind::AmplifierType);
  CHECK(p.pump().angular_frequency() ==
        Approx(p.signal().angular_frequency() + p.converted().angular_frequency()).epsilon(1e-12));
  CHECK_THROWS_AS(spdc_leak_safe(p), UnsupportedProcess);

  ConverterSpec spec{p};
  CHECK_THROWS_AS(conversion_efficiency(spec), UnsupportedProcess);
  const auto train = coherent_train(p.signal(), 4, 1.0, PhasePattern::uniform());
  CHECK_THROWS_AS(convert(train, spec), UnsupportedProcess);
}

TEST_CASE("degenerate pump and signal are rejected") {
  CHECK_THROWS_AS(derive_process(mode_from_wavelength(800.0), mode_from_wavelength(800.0)),
                  InvalidArgument);
}

TEST_CASE("inconsistent processes cannot be constructed") {
  CHECK_THROWS_AS(ThreeWaveProcess(mode_from_wavelength(1551.1), mode_from_wavelength(712.9),
                                   mode_from_wavelength(1300.0), ProcessKind::BeamsplitterType),
                  InvalidArgument);
}

TEST_CASE("spdc_leak_safe is a strict inequality") {
  const auto unsafe = derive_process(mode_from_wavelength(1000.0), mode_from_wavelength(600.0));
  CHECK(unsafe.converted().wavelength_nm() == Approx(1500.0).epsilon(1e-12));
  CHECK_FALSE(spdc_leak_safe(unsafe));

  // w_s = 2 w_p puts the converted channel on the pump frequency.
  const auto pump = mode_from_wavelength(1000.0);
  const auto signal = OpticalMode::from_angular_frequency(2.0 * pump.angular_frequency());
  const ThreeWaveProcess equal(pump, signal, pump, ProcessKind::BeamsplitterType);
  CHECK_FALSE(spdc_leak_safe(equal));
}

TEST_CASE("energy conservation round-trips through the converted wavelength") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> sig(400.0, 1000.0);
  std::uniform_real_distribution<double> stretch(1.05, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double ls = sig(gen);
    const double lp = ls * stretch(gen);
    const auto p = derive_process(mode_from_wavelength(lp), mode_from_wavelength(ls));
    REQUIRE(p.kind() == ProcessKind::BeamsplitterType);
    const auto c = mode_from_wavelength(p.converted().wavelength_nm());
    const double ws = mode_from_wavelength(ls).angular_frequency();
    CHECK(std::abs(mode_from_wavelength(lp).angular_frequency() + c.angular_frequency() - ws) <=
          1e-9 * ws);
    // Using the converted channel as pump gives back the original pump.
    const auto swapped = derive_process(c, mode_from_wavelength(ls));
    CHECK(swapped.converted().wavelength_nm() == Approx(lp).epsilon(1e-9));
  }
}

TEST_CASE("conversion efficiency follows T sin^2(sqrt(eta P))") {
  CHECK(conversion_efficiency(reference_converter().with_pump_power(0.0)) == 0.0);

  // sin^2(sqrt(0.054)) and 0.0035 / sin^2(sqrt(0.054)), mpmath oracle.
  const double eta_int = 0.053034971470850731;
  const double t_sys = 0.065994190303725956;
  CHECK(interaction_efficiency(reference_converter()) == Approx(eta_int).epsilon(1e-14));
  CHECK(conversion_efficiency(reference_converter(t_sys)) == Approx(0.0035).epsilon(1e-14));

  const auto full = reference_converter().with_pump_power(full_conversion_power(2.0));
  CHECK(conversion_efficiency(full) == Approx(1.0).epsilon(1e-15));

  double previous = -1.0;
  const double peak = full_conversion_power(2.0);
  for (int i = 0; i <= 200; ++i) {
    const auto spec = reference_converter(0.3).with_pump_power(peak * i / 200.0);
    const double eta = conversion_efficiency(spec);
    CHECK(eta >= previous);
    CHECK(eta <= spec.system_transmission + 1e-15);
    previous = eta;
  }
}

TEST_CASE("converter spec invariants are enforced") {
  auto spec = reference_converter();
  spec.system_transmission = 1.5;
  CHECK_THROWS_AS(conversion_efficiency(spec), InvalidArgument);
  spec = reference_converter();
  spec.leak_fraction = -0.1;
  CHECK_THROWS_AS(noise_background(spec), InvalidArgument);
  spec = reference_converter();
  spec.noise_coeff_beta = -1.0;
  CHECK_THROWS_AS(noise_background(spec), InvalidArgument);
}

TEST_CASE("convert maps vacuum to vacuum and full conversion empties the signal") {
  const auto spec = reference_converter();
  const auto vac = coherent_train(spec.process.signal(), 4, 0.0, PhasePattern::uniform());
  const auto out = convert(vac, spec);
  CHECK(out.converted.mean_photon_number() == 0.0);
  CHECK(out.residual.mean_photon_number() == 0.0);
  CHECK(out.converted.mode().same_channel(spec.process.converted()));

  const auto full = spec.with_pump_power(full_conversion_power(spec.eta_nor));
  const auto train = coherent_train(spec.process.signal(), 4, 3.0, PhasePattern::alternating(1.0));
  const auto conv = convert(train, full);
  for (std::size_t k = 0; k < train.size(); ++k) {
    CHECK(conv.converted.photons(k) == Approx(train.photons(k)).epsilon(1e-14));
    CHECK(conv.residual.photons(k) < 1e-30);
  }
}

TEST_CASE("convert rejects a train in the wrong mode") {
  const auto spec = reference_converter();
  const auto wrong = coherent_train(mode_from_wavelength(780.0), 4, 1.0, PhasePattern::uniform());
  CHECK_THROWS_AS(convert(wrong, spec), InvalidArgument);
}

TEST_CASE("conversion is unitary before loss") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> power(0.0, 3.0);
  const auto base = reference_converter(1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto spec = base.with_pump_power(power(gen));
    std::vector<Amplitude> amps(16);
    for (auto& a : amps) a = {20.0 * u(gen), 20.0 * u(gen)};
    const CoherentPulseTrain train(spec.process.signal(), amps);
    const auto out = convert(train, spec);
    for (std::size_t k = 0; k < amps.size(); ++k) {
      const double in = train.photons(k);
      CHECK(std::abs(out.converted.photons(k) + out.residual.photons(k) - in) <= 1e-12 * in);
    }
  }
}

TEST_CASE("conversion preserves the phase pattern") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const auto spec = reference_converter(0.066);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> phases(12);
    for (auto& p : phases) p = u(gen);
    const auto train =
        coherent_train(spec.process.signal(), 12, 0.7, PhasePattern::explicit_phases(phases));
    const auto out = convert(train, spec);
    const auto offset = out.converted.amplitudes()[0] / train.amplitudes()[0];
    for (std::size_t k = 1; k < train.size(); ++k) {
      const auto ratio = out.converted.amplitudes()[k] / train.amplitudes()[k];
      CHECK(std::abs(std::arg(ratio / offset)) < 1e-12);
    }
  }

  const auto alt = coherent_train(spec.process.signal(), 6, 0.7, PhasePattern::alternating(0.8));
  const auto out = convert(alt, spec);
  for (std::size_t k = 1; k < alt.size(); ++k) {
    const double dphi = std::arg(out.converted.amplitudes()[k] / out.converted.amplitudes()[k - 1]);
    CHECK(std::abs(dphi) == Approx(0.8).epsilon(1e-12));
  }
}

TEST_CASE("noise background is linear in pump power and split by leak fraction") {
  auto spec = reference_converter();
  spec.noise_coeff_beta = 0.09;
  const auto zero = noise_background(spec.with_pump_power(0.0));
  CHECK(zero.leak_photons_per_gate == 0.0);
  CHECK(zero.raman_photons_per_gate == 0.0);

  const auto one = noise_background(spec.with_pump_power(0.01));
  const auto two = noise_background(spec.with_pump_power(0.02));
  CHECK(two.leak_photons_per_gate == Approx(2.0 * one.leak_photons_per_gate));
  CHECK(two.raman_photons_per_gate == Approx(2.0 * one.raman_photons_per_gate));
  CHECK(one.total() == Approx(0.09 * 0.01));
  CHECK(one.leak_photons_per_gate == Approx(0.8 * one.total()));
  CHECK(one.raman_photons_per_gate == Approx(0.2 * one.total()));
}
