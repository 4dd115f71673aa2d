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
#include <numbers>
#include <random>
#include <vector>

#include "reference_chain.hpp"
#include "qfdc/experiment.hpp"

using Catch::Approx;
using namespace qfdc;
using qfdc::testing::reference_chain;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("expected floors of the calibrated chain") {
  const auto chain = reference_chain();
  const auto open = expected_rate(0.0, std::nullopt, chain.without_interferometer());
  CHECK(open.click_probability == Approx(7e-5).epsilon(0.15));
  const auto ifm = expected_rate(0.0, std::nullopt, chain);
  CHECK(ifm.click_probability == Approx(3e-5).epsilon(0.15));
  CHECK(ifm.signal_photons == 0.0);
  CHECK(open.background_photons > ifm.background_photons);
}

TEST_CASE("expected_rate fringe extremes reproduce the low-mu visibility") {
  const auto chain = reference_chain();
  const double pmax = expected_rate(0.7, 0.0, chain).click_probability;
  const double pmin = expected_rate(0.7, kPi, chain).click_probability;
  CHECK((pmax - pmin) / (pmax + pmin) == Approx(0.379).margin(0.011));
}

TEST_CASE("expected_rate rejects a phase without interferometer") {
  CHECK_THROWS_AS(expected_rate(0.7, 0.0, reference_chain().without_interferometer()),
                  InvalidArgument);
  CHECK_THROWS_AS(expected_rate(-1.0, std::nullopt, reference_chain()), InvalidArgument);
}

TEST_CASE("signal term is linear in mu and detector efficiency enters once") {
  auto chain = reference_chain().without_interferometer();
  const double eta_chain = conversion_efficiency(chain.converter) * chain.post_converter_transmission;
  for (double mu : {0.01, 0.7, 125.0}) {
    CHECK(expected_rate(mu, std::nullopt, chain).signal_photons ==
          Approx(mu * eta_chain).epsilon(1e-14));
  }
  chain.detector.dark_prob_per_gate = 0.0;
  chain.converter.noise_coeff_beta = 0.0;
  const double mu = 0.3;
  CHECK(expected_rate(mu, std::nullopt, chain).click_probability ==
        Approx(1.0 - std::exp(-0.1 * mu * eta_chain)).epsilon(1e-12));
}

TEST_CASE("analytic visibility at the calibrated operating points") {
  const auto chain = reference_chain();
  CHECK(analytic_visibility(143.0, chain).raw == Approx(0.94).margin(0.005));
  const auto low = analytic_visibility(0.7, chain);
  CHECK(low.raw == Approx(0.379).margin(0.011));
  CHECK(low.subtracted == Approx(0.721).margin(0.022));
}

TEST_CASE("background-free chain shows the intrinsic visibility") {
  auto chain = reference_chain();
  chain.converter.noise_coeff_beta = 0.0;
  chain.detector.dark_prob_per_gate = 0.0;
  for (double mu : {1e-4, 0.01, 0.7, 10.0}) {
    // Only detector saturation (~ eff * n / 8 relative) remains.
    CHECK(analytic_visibility(mu, chain).raw == Approx(chain.intrinsic_visibility_v0).epsilon(2e-3));
  }
}

TEST_CASE("analytic visibility limits and ordering") {
  const auto chain = reference_chain();
  CHECK(analytic_visibility(0.0, chain).raw == 0.0);
  CHECK(analytic_visibility(1e-7, chain).raw < 1e-5);
  double previous = 0.0;
  for (int i = 0; i <= 120; ++i) {
    const double mu = std::pow(10.0, -3.0 + 5.3 * i / 120.0);  // 1e-3 .. 200
    const auto v = analytic_visibility(mu, chain);
    CHECK(v.raw >= previous);
    CHECK(v.subtracted >= v.raw);
    CHECK(v.raw >= 0.0);
    CHECK(v.subtracted <= chain.intrinsic_visibility_v0);
    previous = v.raw;
  }
  CHECK(linearized_visibility(1e6, 3e-5, 0.948) == Approx(0.948).epsilon(1e-9));
  CHECK(linearized_visibility(0.0, 3e-5, 0.948) == 0.0);
}

TEST_CASE("analytic visibility agrees with the linearized formula at low flux") {
  const auto chain = reference_chain();
  const auto& det = chain.detector;
  for (double mu : {0.03, 0.09, 0.7, 3.0}) {
    const double s = det.efficiency * signal_before_interferometer(mu, chain);
    const double bn = det.efficiency * background_at_detector(chain);
    const auto v = analytic_visibility(mu, chain);
    CHECK(v.raw == Approx(linearized_visibility(s, bn + det.dark_prob_per_gate,
                                                chain.intrinsic_visibility_v0))
                       .epsilon(1e-3));
    CHECK(v.subtracted ==
          Approx(linearized_visibility(s, bn, chain.intrinsic_visibility_v0)).epsilon(1e-3));
  }
}

TEST_CASE("amplitude chain reproduces the closed-form click probability") {
  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    auto chain = reference_chain();
    chain.interferometer->phase_bias_theta = (i % 3 == 0) ? 0.0 : 2.0 * kPi * u(gen);
    chain.intrinsic_visibility_v0 = u(gen);
    chain.interferometer->insertion_transmission = u(gen);
    const double mu = std::pow(10.0, -2.0 + 4.0 * u(gen));
    const double phi = 2.0 * kPi * u(gen);
    const auto slots = detected_slot_photons(mu, phi, chain);
    CHECK(gate_click_probability(slots, chain.detector) ==
          Approx(expected_rate(mu, phi, chain).click_probability).epsilon(1e-12));

    const auto open = chain.without_interferometer();
    CHECK(gate_click_probability(detected_slot_photons(mu, std::nullopt, open), open.detector) ==
          Approx(expected_rate(mu, std::nullopt, open).click_probability).epsilon(1e-12));
  }
}

TEST_CASE("Monte Carlo points agree with the closed form in 99 % of seeds") {
  const auto chain = reference_chain();
  struct Setting {
    double mu;
    std::optional<double> phi;
    bool interferometer;
  };
  const Setting settings[] = {{0.0, std::nullopt, false}, {0.01, std::nullopt, false},
                              {125.0, std::nullopt, false}, {0.7, 0.0, true},
                              {0.7, kPi, true},           {143.0, 1.0, true}};
  for (const auto& s : settings) {
    const auto c = s.interferometer ? chain : chain.without_interferometer();
    const double p = expected_rate(s.mu, s.phi, c).click_probability;
    const std::uint64_t n = 2'000'000;
    const double sigma = std::sqrt(p * (1 - p) / n);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto summary = simulate_point(s.mu, s.phi, c, n, seed, 1);
      if (std::abs(summary.p_click - p) < 5.0 * sigma) ++good;
    }
    CHECK(good >= 99);
  }
}

TEST_CASE("efficiency scan") {
  const auto chain = reference_chain().without_interferometer();
  RunOptions opt;
  opt.seed = 77;
  opt.gates_per_point = 40'000'000;
  const std::vector<double> powers{0.0, 0.009, 0.018, 0.027};
  const auto scan = run_fig4a(powers, 125.0, chain, opt);
  REQUIRE(scan.points.size() == 4);

  const auto& zero = scan.points[0];
  CHECK(zero.expected_efficiency == 0.0);
  CHECK(zero.expected_noise == 0.0);
  CHECK(std::abs(zero.efficiency) < 5.0 * zero.efficiency_sigma);
  CHECK(std::abs(zero.noise_photons) < 5.0 * zero.noise_sigma);

  const auto& top = scan.points[3];
  CHECK(top.expected_efficiency == Approx(0.0035).epsilon(1e-12));
  CHECK(std::abs(top.efficiency - 0.0035) < 5.0 * top.efficiency_sigma);

  for (const auto& pt : scan.points) {
    CHECK(std::abs(pt.efficiency - pt.expected_efficiency) < 5.0 * pt.efficiency_sigma);
    CHECK(std::abs(pt.noise_photons - pt.expected_noise) < 5.0 * pt.noise_sigma);
  }
  REQUIRE(scan.noise_fit.has_value());
  CHECK(std::abs(scan.noise_fit->slope - chain.converter.noise_coeff_beta) <
        5.0 * scan.noise_fit->slope_sigma);
  CHECK(scan.noise_fit->chi2 < 20.0);

  CHECK_THROWS_AS(run_fig4a(powers, 125.0, reference_chain(), opt), InvalidArgument);
}

TEST_CASE("count-rate scan slope matches the chain efficiency") {
  const auto chain = reference_chain().without_interferometer();
  RunOptions opt;
  opt.seed = 5;
  // Low enough statistics that detector saturation at mu = 125 (~0.4 %) is
  // inside the slope uncertainty.
  opt.gates_per_point = 1'000'000;
  const std::vector<double> mus{0.0, 0.1, 1.0, 10.0, 125.0};
  const auto scan = run_fig4b(mus, chain, opt);
  CHECK(std::abs(scan.fit.slope - scan.expected_slope) < 3.0 * scan.fit.slope_sigma);
  CHECK(std::abs(scan.points[0].subtracted.p) < 5.0 * scan.points[0].subtracted.sigma);
  CHECK(scan.floor.p_click == Approx(7e-5).epsilon(0.3));
  for (const auto& pt : scan.points) CHECK(pt.fit_line == Approx(scan.fit.slope * pt.mu));
  CHECK_THROWS_AS(run_fig4b(mus, reference_chain(), opt), InvalidArgument);
}

TEST_CASE("fringe scan and the intensity-modulation control run") {
  const auto chain = reference_chain();
  RunOptions opt;
  opt.seed = 99;
  const auto phis = phase_grid(16);

  const auto bright = run_fig5(143.0, phis, chain, opt);
  CHECK(bright.with_interferometer);
  CHECK(std::abs(bright.visibility() - analytic_visibility(143.0, chain).raw) <
        4.0 * bright.visibility_sigma());
  for (const auto& pt : bright.points) {
    CHECK(std::abs(pt.counts.p_click - pt.expected_p) < 5.0 * pt.counts.sigma_p);
  }

  const auto control = run_fig5(143.0, phis, chain.without_interferometer(), opt);
  CHECK_FALSE(control.with_interferometer);
  CHECK(std::abs(control.visibility()) < 3.0 * control.visibility_sigma());

  CHECK(std::abs(bright.dark.p_click - 2.6e-5) < 5.0 * bright.dark.sigma_p);
  CHECK(bright.visibility_subtracted() > bright.visibility());

  const std::vector<double> few{0.0, 1.0, 2.0};
  CHECK_THROWS_AS(run_fig5(0.7, few, chain, opt), InvalidArgument);
}

TEST_CASE("scans are reproducible for a fixed seed") {
  const auto chain = reference_chain();
  RunOptions opt;
  opt.seed = 3;
  opt.gates_per_point = 3'000'000;
  const std::vector<double> mus{0.09, 0.7};
  opt.threads = 1;
  const auto a = run_fig6(mus, chain, opt);
  opt.threads = 4;
  const auto b = run_fig6(mus, chain, opt);
  for (std::size_t i = 0; i < mus.size(); ++i) {
    CHECK(a.points[i].v_raw == b.points[i].v_raw);
    CHECK(a.points[i].v_sub == b.points[i].v_sub);
  }
  opt.seed = 4;
  const auto c = run_fig6(mus, chain, opt);
  CHECK(c.points[1].v_raw != a.points[1].v_raw);
}

TEST_CASE("visibility scan flags detectable fringes") {
  const auto chain = reference_chain();
  RunOptions opt;
  opt.seed = 11;
  const std::vector<double> mus{0.09, 0.7, 143.0};
  const auto scan = run_fig6(mus, chain, opt);
  for (const auto& pt : scan.points) {
    CHECK(pt.detectable);
    CHECK(std::abs(pt.v_raw - pt.analytic.raw) < 4.0 * pt.sigma_raw);
    CHECK(pt.v_sub > pt.v_raw);
  }
  REQUIRE(scan.smallest_detectable_mu.has_value());
  CHECK(*scan.smallest_detectable_mu == 0.09);
  CHECK_THROWS_AS(run_fig6(mus, chain.without_interferometer(), opt), InvalidArgument);
}

TEST_CASE("raw count excess over the line fades with mu") {
  const auto chain = reference_chain().without_interferometer();
  RunOptions opt;
  opt.seed = 21;
  opt.gates_per_point = 100'000'000;
  const std::vector<double> mus{0.01, 0.1, 1.0, 10.0, 125.0};
  const auto scan = run_fig4b(mus, chain, opt);
  double previous = 1e300;
  for (const auto& pt : scan.points) {
    const double relative = pt.raw.p_click / pt.fit_line - 1.0;
    CHECK(relative < previous);
    previous = relative;
  }
  CHECK(previous < 0.01);
  // At mu = 1 the signal is still comparable to the floor.
  CHECK(scan.points[2].raw.p_click / scan.points[2].fit_line > 1.5);
}
