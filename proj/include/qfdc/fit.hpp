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

// Small linear least-squares fits used by the scan analyses.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "qfdc/error.hpp"

namespace qfdc {

/// y = offset + amplitude * cos(phi), with the parameter covariance
/// propagated from independent per-point standard errors.
struct SinusoidFit {
  double offset = 0.0;     // c0
  double amplitude = 0.0;  // c1
  double var_offset = 0.0;
  double var_amplitude = 0.0;
  double cov = 0.0;

  double visibility() const { return amplitude / offset; }

  double visibility_sigma() const {
    const double c0 = offset;
    const double c1 = amplitude;
    const double var = var_amplitude / (c0 * c0) + c1 * c1 * var_offset / (c0 * c0 * c0 * c0) -
                       2.0 * c1 * cov / (c0 * c0 * c0);
    return std::sqrt(std::max(var, 0.0));
  }

  /// Same fit with a constant background (and its variance) removed.
  SinusoidFit minus_constant(double background, double background_var) const {
    SinusoidFit out = *this;
    out.offset -= background;
    out.var_offset += background_var;
    return out;
  }
};

/// Ordinary least squares on (1, cos phi); needs at least 4 points.
inline SinusoidFit fit_sinusoid(std::span<const double> phi, std::span<const double> y,
                                std::span<const double> sigma) {
  detail::require(phi.size() >= 4, "sinusoid fit needs at least 4 phase points");
  detail::require(phi.size() == y.size() && y.size() == sigma.size(),
                  "sinusoid fit inputs must have equal length");
  const std::size_t n = phi.size();
  double s1 = 0.0, sc = 0.0, scc = 0.0, sy = 0.0, scy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(phi[i]);
    s1 += 1.0;
    sc += c;
    scc += c * c;
    sy += y[i];
    scy += c * y[i];
  }
  const double det = s1 * scc - sc * sc;
  detail::require(std::abs(det) > 1e-12 * s1 * scc, "phase grid does not resolve cos(phi)");

  SinusoidFit fit;
  fit.offset = (scc * sy - sc * scy) / det;
  fit.amplitude = (s1 * scy - sc * sy) / det;
  // Row i of (A^T A)^-1 A^T: offset weight (scc - sc c_i)/det, amplitude (s1 c_i - sc)/det.
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(phi[i]);
    const double w0 = (scc - sc * c) / det;
    const double w1 = (s1 * c - sc) / det;
    const double v = sigma[i] * sigma[i];
    fit.var_offset += w0 * w0 * v;
    fit.var_amplitude += w1 * w1 * v;
    fit.cov += w0 * w1 * v;
  }
  return fit;
}

/// Weighted fit of y = slope * x (no intercept), weights 1/sigma^2.
struct ProportionalFit {
  double slope = 0.0;
  double slope_sigma = 0.0;
  double chi2 = 0.0;
  std::size_t dof = 0;

  double operator()(double x) const { return slope * x; }
};

inline ProportionalFit fit_through_origin(std::span<const double> x, std::span<const double> y,
                                          std::span<const double> sigma) {
  detail::require(!x.empty() && x.size() == y.size() && y.size() == sigma.size(),
                  "proportional fit inputs must be non-empty and of equal length");
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require(sigma[i] > 0.0, "proportional fit needs positive uncertainties");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  detail::require(sxx > 0.0, "proportional fit needs a non-zero abscissa");
  ProportionalFit fit;
  fit.slope = sxy / sxx;
  fit.slope_sigma = std::sqrt(1.0 / sxx);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (y[i] - fit.slope * x[i]) / sigma[i];
    fit.chi2 += r * r;
  }
  fit.dof = x.size() - 1;
  return fit;
}

}  // namespace qfdc
