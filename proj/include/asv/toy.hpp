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

// Finite K-stage toy process with binary covariates, used as an exact
// oracle. Every observed trajectory is enumerable, and the potential
// survival indicators share one uniform per stage across arms.

#ifndef ASV_TOY_HPP_
#define ASV_TOY_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "asv/general_k.hpp"
#include "asv/nuisance.hpp"

namespace asv {

struct ToyParams {
  int K = 2;
  double px1 = 0.45;
  // P(X_k = 1) = logistic(g0 + g1 x1 + g2 x_{k-1} + g3 a_{k-1}), k >= 2.
  double g0 = -0.2, g1 = 0.8, g2 = 0.5, g3 = 0.6;
  // P(A_k = 1) = logistic(al0 + al1 x_k + al2 x1 + al3 a_{k-1}).
  double al0 = 0.1, al1 = 0.5, al2 = -0.4, al3 = 0.3;
  // P(C_k = 0) = logistic(et0 + et1 x_k + et2 a_k).
  double et0 = 2.0, et1 = -0.5, et2 = 0.4;
  // P(S_k = 1) = logistic(ga0 + ga1 x1 + ga2 sum(a_1..a_k) + ga3 (k - 1)).
  double ga0 = 1.2, ga1 = -0.8, ga2 = 0.7, ga3 = 0.3;
  // E[Y] = b0 + b1 x1 + b2 sum(x_2..x_K) + b3 sum(a) + b4 a_K x_K + b5 a_1 x1.
  double b0 = 1.0, b1 = 0.5, b2 = 1.0, b3 = 0.8, b4 = -1.5, b5 = -1.2;
  double sd = 1.0;
};

class ToyDgp {
 public:
  explicit ToyDgp(ToyParams p);

  int K() const { return p_.K; }
  const ToyParams& params() const { return p_; }

  // Model pieces. Histories are read from t; `arms` holds a_1..a_k.
  double x_prob(int k, double x1, double x_prev, int a_prev) const;
  double treat_prob(int k, double x1, double xk, int a_prev) const;
  double uncensored_prob(double xk, int ak) const;
  double survival_prob(int k, double x1, std::span<const int> arms) const;
  double outcome_mean(const KTrajectory& t) const;

  KDataset sample(std::size_t n, std::uint64_t seed) const;
  // K = 2 only.
  Dataset sample_two_stage(std::size_t n, std::uint64_t seed) const;

  // E[Y^pi | always-survivor] from the potential-outcome process.
  double always_survivor_value(const KPolicy& policy) const;
  // Same value identified from the observed-data law by principal-score
  // weighting of the nested outcome regressions.
  double identified_value(const KPolicy& policy) const;
  // P(always-survivor | x1) from the latent survival uniforms, and the
  // observed-data product of nested all-control survival regressions.
  double latent_stratum_prob(double x1) const;
  double observed_stratum_prob(double x1) const;

  // Exact E[phi_N], E[phi_D] over the observed-data law.
  std::pair<double, double> expected_phi(const KPolicy& policy,
                                         const KNuisanceSuite& suite) const;

  // Monte Carlo plug-in mean(prod m_p * m_mu) / mean(prod m_p) over m
  // draws of X1, with a delta-method standard error.
  struct McValue {
    double value = 0.0;
    double se = 0.0;
  };
  McValue plugin_oracle(const KPolicy& policy, std::size_t m, std::uint64_t seed) const;

  // True nuisances. The returned suite keeps references to this object and
  // to `policy`.
  std::unique_ptr<KNuisanceSuite> true_suite(const KPolicy& policy) const;
  // K = 2 only.
  FunctionSuite true_two_stage_suite(const LinearPolicy& policy) const;

  // Q_{Y,k} at the history of t, following the policy from stage k on.
  double q_y(int k, const KTrajectory& t, const KPolicy& policy) const;

 private:
  struct Leaf {
    std::vector<int> tokens;  // x1 a1 c1 [s1 x2 a2 c2 [s2 ...]]
    KTrajectory traj;
    double prob = 0.0;
  };
  void enumerate();
  double mass(const std::vector<int>& prefix) const;
  double observed_r(std::vector<int> prefix, int k) const;
  double observed_q_y(std::vector<int> prefix, int k, const KPolicy& policy) const;

  ToyParams p_;
  std::vector<Leaf> leaves_;
};

}  // namespace asv

#endif  // ASV_TOY_HPP_
