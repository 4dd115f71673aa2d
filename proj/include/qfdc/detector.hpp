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

// Gated Geiger-mode single-photon detector.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <thread>
#include <vector>

#include "qfdc/error.hpp"
#include "qfdc/random.hpp"

namespace qfdc {

struct DetectorSpec {
  double efficiency = 0.10;
  double dark_prob_per_gate = 2.6e-5;
  double gate_rate_hz = 4e6;

  void validate() const {
    detail::require(efficiency >= 0.0 && efficiency <= 1.0,
                    "detector efficiency must lie in [0, 1]");
    detail::require(dark_prob_per_gate >= 0.0 && dark_prob_per_gate <= 1.0,
                    "dark count probability must lie in [0, 1]");
    detail::require(std::isfinite(gate_rate_hz) && gate_rate_hz > 0.0,
                    "gate rate must be positive");
  }
};

/// Aggregated clicks over a run of gates.
struct CountSummary {
  std::uint64_t gates = 0;
  std::uint64_t clicks = 0;
  double p_click = 0.0;
  double sigma_p = 0.0;  // binomial standard error
  double rate_per_s = 0.0;
  double gate_rate_hz = 0.0;

  static CountSummary from_counts(std::uint64_t gates, std::uint64_t clicks,
                                  double gate_rate_hz) {
    detail::require(clicks <= gates, "clicks cannot exceed gates");
    CountSummary s;
    s.gates = gates;
    s.clicks = clicks;
    if (gates > 0) {
      const double n = static_cast<double>(gates);
      s.p_click = static_cast<double>(clicks) / n;
      s.sigma_p = std::sqrt(s.p_click * (1.0 - s.p_click) / n);
    }
    s.rate_per_s = s.p_click * gate_rate_hz;
    s.gate_rate_hz = gate_rate_hz;
    return s;
  }

  double sigma_rate_per_s() const { return sigma_p * gate_rate_hz; }
};

/// Probability of at least one click in a gate when the incident light has
/// Poissonian mean mean_photons: 1 - (1 - dark) exp(-efficiency * mean).
inline double click_probability(double mean_photons, const DetectorSpec& spec) {
  detail::require(std::isfinite(mean_photons) && mean_photons >= 0.0,
                  "mean photon number at the detector must be >= 0");
  // 1 - (1 - d) e^{-x}, written to avoid cancellation at small x.
  const double d = spec.dark_prob_per_gate;
  return d - (1.0 - d) * std::expm1(-spec.efficiency * mean_photons);
}

inline constexpr std::uint64_t kGatesPerBlock = std::uint64_t{1} << 20;

namespace detail {

// Bernoulli(p) clicks among n gates, drawn as geometric gaps between clicks.
inline std::uint64_t count_block(double p, std::uint64_t n, std::uint64_t seed,
                                 std::uint64_t block) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  auto engine = rng::block_engine(seed, block);
  const double log_q = std::log1p(-p);
  std::uint64_t pos = 0;
  std::uint64_t clicks = 0;
  for (;;) {
    const double gap = std::floor(std::log(rng::uniform_open_closed(engine)) / log_q);
    if (gap >= static_cast<double>(n - pos)) break;
    pos += static_cast<std::uint64_t>(gap) + 1;
    ++clicks;
    if (pos >= n) break;
  }
  return clicks;
}

}  // namespace detail

/// Number of clicks among n_gates independent gates each clicking with
/// probability p. The result depends only on (p, n_gates, seed): gates are
/// cut into fixed blocks with their own substreams, and threads only decide
/// who evaluates which block. threads == 0 uses the hardware concurrency.
inline std::uint64_t sample_clicks(double p, std::uint64_t n_gates, std::uint64_t seed,
                                   unsigned threads = 0) {
  detail::require(n_gates >= 1, "need at least one gate");
  detail::require(p >= 0.0 && p <= 1.0, "click probability must lie in [0, 1]");
  const std::uint64_t blocks = (n_gates + kGatesPerBlock - 1) / kGatesPerBlock;
  auto block_size = [&](std::uint64_t b) {
    return std::min(kGatesPerBlock, n_gates - b * kGatesPerBlock);
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers =
      static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
  if (workers <= 1) {
    std::uint64_t total = 0;
    for (std::uint64_t b = 0; b < blocks; ++b) {
      total += detail::count_block(p, block_size(b), seed, b);
    }
    return total;
  }

  std::vector<std::uint64_t> partial(workers, 0);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t b = w; b < blocks; b += workers) {
          partial[w] += detail::count_block(p, block_size(b), seed, b);
        }
      });
    }
  }
  return std::accumulate(partial.begin(), partial.end(), std::uint64_t{0});
}

/// Simulates n_gates gates with the given mean photon number at the detector.
inline CountSummary sample_gates(double mean_photons, const DetectorSpec& spec,
                                 std::uint64_t n_gates, std::uint64_t seed,
                                 unsigned threads = 0) {
  spec.validate();
  const double p = click_probability(mean_photons, spec);
  return CountSummary::from_counts(n_gates, sample_clicks(p, n_gates, seed, threads),
                                   spec.gate_rate_hz);
}

struct CorrectedRate {
  double p = 0.0;
  double sigma = 0.0;
  bool negative = false;
};

/// Background-subtracted click probability with independent errors added in
/// quadrature. Negative results are kept and flagged.
inline CorrectedRate dark_subtract(const CountSummary& signal, const CountSummary& background) {
  detail::require(signal.gate_rate_hz == background.gate_rate_hz,
                  "summaries were recorded at different gate rates");
  CorrectedRate out;
  out.p = signal.p_click - background.p_click;
  out.sigma = std::hypot(signal.sigma_p, background.sigma_p);
  out.negative = out.p < 0.0;
  return out;
}

}  // namespace qfdc
