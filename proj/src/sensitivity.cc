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

#include "asv/sensitivity.hpp"

#include <charconv>
#include <algorithm>
#include <cmath>
#include <fstream>

#include "asv/error.hpp"
#include "asv/numeric.hpp"

namespace asv {
namespace {

void check_omega(double w, const char* name) {
  if (!(std::fabs(w) >= kMinOmega)) throw ZeroOmega(std::string(name) + " is zero");
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

SensitivityParams SensitivityParams::constant(double rho, std::optional<double> lambda) {
  if (!(rho > 0)) throw ConfigError("rho must be positive");
  SensitivityParams p;
  p.rho01_0101 = p.rho01_0111 = rho;
  p.rho10_0011 = p.rho10_0111 = rho;
  p.rho11_0101 = p.rho11_0011 = p.rho11_0001 = rho;
  p.lambda = lambda;
  return p;
}

OmegaWeights omega_from_m(double m00, double m01, double m10, double m11,
                          const SensitivityParams& p) {
  const double lambda = p.lambda ? *p.lambda : m00 - m01;
  OmegaWeights w;
  // Each weight is 1 plus (rho - 1) times its stratum share plus the
  // remainder that vanishes when the displayed terms telescope.
  w.w01 = 1.0 + (p.rho01_0101 - 1.0) * (1.0 - m10 / m01) +
          (p.rho01_0111 - 1.0) * (m10 - m00) / m01;
  w.w10 = 1.0 + (p.rho10_0011 - 1.0) * (1.0 - m01 / m10) +
          (p.rho10_0111 - 1.0) * (m01 - m00) / m10;
  w.w11 = 1.0 + (p.rho11_0101 - 1.0) * (m01 - m10) / m11 +
          (p.rho11_0011 - 1.0) * (m10 - m01) / m11 +
          (p.rho11_0001 - 1.0) * (1.0 - (m01 + lambda) / m11) + (m00 - m01 - lambda) / m11;
  check_omega(w.w01, "omega01");
  check_omega(w.w10, "omega10");
  check_omega(w.w11, "omega11");
  return w;
}

OmegaWeights omega_weights(Point x1, const NuisanceSuite& suite, const SensitivityParams& params,
                           const Positivity& pos) {
  const double m00 = pos.trim(suite.m_p2(0, 0, x1));
  const double m01 = pos.trim(suite.m_p2(0, 1, x1));
  const double m10 = pos.trim(suite.m_p2(1, 0, x1));
  const double m11 = pos.trim(suite.m_p2(1, 1, x1));
  return omega_from_m(m00, m01, m10, m11, params);
}

EstimateReport v_sensitivity_omega(const Dataset& d, const LinearPolicy& policy,
                                   const FittedSuite& suite, const OmegaFunction& omega,
                                   const EstimatorOptions& opts) {
  if (d.empty()) throw EmptyStratum("dataset");
  const Positivity& pos = opts.positivity;
  FunctionSuite nu;
  nu.f_mu2 = [&](int a1, int a2, Point x1, Point x2) {
    const double w = omega(a1, a2, x1);
    check_omega(w, "omega");
    return suite.mu2(a1, a2, x1, x2) / w;
  };
  // Same basis and bounds as the fitted m_mu2.
  const PolicyOutcomeFitter fitter(d, nu, suite.spec()[NuisanceId::kMMu2], suite.bases().m,
                                   suite.options().positivity);
  const PolicyOutcomeModel m_nu = fitter.fit(policy);
  std::vector<double> num(d.size()), den(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x1 = d.rows[i].x1;
    den[i] = pos.trim(suite.p1(0, x1)) * pos.trim(suite.m_p2(0, 0, x1));
    num[i] = den[i] * pos.bound(m_nu(x1));
  }
  EstimateReport r = bootstrap_ratio_report("sensitivity", num, den, opts.bootstrap, opts.seed);
  return r;
}

EstimateReport v_sensitivity(const Dataset& d, const LinearPolicy& policy,
                             const FittedSuite& suite, const SensitivityParams& params,
                             const EstimatorOptions& opts) {
  const Positivity pos = opts.positivity;
  auto omega = [&suite, params, pos](int a1, int a2, Point x1) {
    if (a1 == 0 && a2 == 0) return 1.0;
    const OmegaWeights w = omega_weights(x1, suite, params, pos);
    if (a1 == 0) return w.w01;
    return a2 == 0 ? w.w10 : w.w11;
  };
  return v_sensitivity_omega(d, policy, suite, omega, opts);
}

SensitivityGrid sensitivity_grid(const Dataset& d, const LinearPolicy& policy,
                                 const FittedSuite& suite, const std::vector<double>& rho_grid,
                                 const std::vector<std::optional<double>>& lambda_grid,
                                 const EstimatorOptions& opts, int threads) {
  SensitivityGrid g;
  g.baseline = v_q_plugin(d, policy, suite, opts);
  for (double rho : rho_grid) {
    for (const auto& lambda : lambda_grid) g.points.push_back({rho, lambda, {}, 0.0});
  }
  parallel_for(g.points.size(), threads, [&](std::size_t i) {
    SensitivityPoint& p = g.points[i];
    p.report = v_sensitivity(d, policy, suite, SensitivityParams::constant(p.rho, p.lambda), opts);
    p.relative_deviation =
        std::fabs(p.report.value - g.baseline.value) / std::fabs(g.baseline.value);
  });
  for (const SensitivityPoint& p : g.points) {
    g.max_relative_deviation = std::max(g.max_relative_deviation, p.relative_deviation);
  }
  return g;
}

void write_grid_csv(const SensitivityGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "rho,lambda,value,se,relative_deviation\n";
  for (const SensitivityPoint& p : grid.points) {
    out << fmt(p.rho) << ',' << (p.lambda ? fmt(*p.lambda) : std::string("null")) << ','
        << fmt(p.report.value) << ',' << fmt(p.report.se) << ',' << fmt(p.relative_deviation)
        << '\n';
  }
}

}  // namespace asv
