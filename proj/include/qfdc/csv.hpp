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

// CSV tables for the scan results. Numbers use the shortest representation
// that parses back to the same double.

#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <system_error>

#include "qfdc/experiment.hpp"

namespace qfdc::csv {

inline std::string number(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

namespace detail {
template <typename... T>
void row(std::ostream& out, double first, T... rest) {
  out << number(first);
  ((out << ',' << number(rest)), ...);
  out << '\n';
}
}  // namespace detail

inline void write(std::ostream& out, const EfficiencyScan& scan) {
  out << "power_mw,efficiency,eff_sigma,noise_per_gate,noise_sigma\n";
  for (const auto& p : scan.points) {
    detail::row(out, p.pump_power_w * 1e3, p.efficiency, p.efficiency_sigma, p.noise_photons,
                p.noise_sigma);
  }
}

inline void write(std::ostream& out, const CountRateScan& scan) {
  out << "mu,p_raw,sigma,p_subtracted,sigma,fit_line\n";
  for (const auto& p : scan.points) {
    detail::row(out, p.mu, p.raw.p_click, p.raw.sigma_p, p.subtracted.p, p.subtracted.sigma,
                p.fit_line);
  }
}

inline void write(std::ostream& out, const FringeScan& scan) {
  out << "phi_rad,rate_per_s,sigma\n";
  for (const auto& p : scan.points) {
    detail::row(out, p.phi, p.counts.rate_per_s, p.counts.sigma_rate_per_s());
  }
}

inline void write(std::ostream& out, const VisibilityScan& scan) {
  out << "mu,v_raw,sigma,v_sub,sigma,v_analytic\n";
  for (const auto& p : scan.points) {
    detail::row(out, p.mu, p.v_raw, p.sigma_raw, p.v_sub, p.sigma_sub, p.analytic.raw);
  }
}

}  // namespace qfdc::csv
