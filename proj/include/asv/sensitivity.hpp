// Copyright 2026 The ASV Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Sensitivity of the always-survivor value to principal ignorability.

#ifndef ASV_SENSITIVITY_HPP_
#define ASV_SENSITIVITY_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asv/estimators.hpp"
#include "asv/nuisance.hpp"

namespace asv {

// Tilting ratios rho_u^{a} per treatment arm a and stratum u (strata as
// U = (S2^00, S2^01, S2^10, S2^11)) plus the strata offset lambda. An
// absent lambda means the null function m_p2^00 - m_p2^01.
struct SensitivityParams {
  double rho01_0101 = 1.0, rho01_0111 = 1.0;
  double rho10_0011 = 1.0, rho10_0111 = 1.0;
  double rho11_0101 = 1.0, rho11_0011 = 1.0, rho11_0001 = 1.0;
  std::optional<double> lambda;

  static SensitivityParams constant(double rho, std::optional<double> lambda = std::nullopt);
};

struct OmegaWeights {
  double w01 = 1.0;
  double w10 = 1.0;
  double w11 = 1.0;
};

inline constexpr double kMinOmega = 1e-8;

// From the four m_p2 arm values. Arranged so that rho = 1 gives
// omega01 = omega10 = 1 without rounding.
OmegaWeights omega_from_m(double m00, double m01, double m10, double m11,
                          const SensitivityParams& params);
OmegaWeights omega_weights(Point x1, const NuisanceSuite& suite, const SensitivityParams& params,
                           const Positivity& pos = {});

// omega(a1, a2, x1); omega(0, 0, .) is normally 1.
using OmegaFunction = std::function<double(int, int, Point)>;

// Plug-in mean(p1^0 m00 m_nu) / mean(p1^0 m00), where m_nu^pi regresses
// mu2^{a1, pi2} / omega_{a1 pi2} on x1 per stage-1 arm.
EstimateReport v_sensitivity_omega(const Dataset& d, const LinearPolicy& policy,
                                   const FittedSuite& suite, const OmegaFunction& omega,
                                   const EstimatorOptions& opts = {});
EstimateReport v_sensitivity(const Dataset& d, const LinearPolicy& policy,
                             const FittedSuite& suite, const SensitivityParams& params,
                             const EstimatorOptions& opts = {});

struct SensitivityPoint {
  double rho = 1.0;
  std::optional<double> lambda;
  EstimateReport report;
  double relative_deviation = 0.0;  // |value - baseline| / |baseline|
};

struct SensitivityGrid {
  EstimateReport baseline;  // q_plugin
  std::vector<SensitivityPoint> points;
  double max_relative_deviation = 0.0;
};

// lambda_grid entries that are absent use the null function.
SensitivityGrid sensitivity_grid(const Dataset& d, const LinearPolicy& policy,
                                 const FittedSuite& suite, const std::vector<double>& rho_grid,
                                 const std::vector<std::optional<double>>& lambda_grid,
                                 const EstimatorOptions& opts = {}, int threads = 1);

// Long format: rho,lambda,value,se,relative_deviation (lambda "null" for
// the null function).
void write_grid_csv(const SensitivityGrid& grid, const std::string& path);

}  // namespace asv

#endif  // ASV_SENSITIVITY_HPP_
