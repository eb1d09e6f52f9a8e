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

// Two-stage data generating processes with coupled potential outcomes and
// their ground-truth oracles.

#ifndef ASV_SIMULATION_HPP_
#define ASV_SIMULATION_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "asv/formula.hpp"
#include "asv/nuisance.hpp"
#include "asv/policy.hpp"
#include "asv/trajectory.hpp"

namespace asv {

// Model formulas. Stage-1 formulas are over (x1, a1), stage-2 formulas over
// (x1, a1, x2, a2). Binary models give the logit of P(A = 1), P(C = 0) and
// P(S = 1); the censoring logits add eta1 / eta2.
struct SimConfig {
  std::string preset = "dgp1";
  std::string e1 = "0.3 + 0.2*x1";
  std::string c1 = "x1 + a1";
  double eta1 = 2.0;
  std::string p1 = "5*x1 + 3*a1 + 0.5*a1*x1";
  std::string x2_mean = "0.2 + 0.3*x1 + 1.5*a1 + 0.75*a1*x1";
  double x2_sd = 1.5;
  std::string e2 = "0.7 + 0.2*x1 - 0.2*x2 - 0.1*x2^2";
  std::string c2 = "-3 + x1 + x2 + 0.5*a2 + a2*x2";
  double eta2 = 3.5;
  std::string p2 = "0.8 - 1.42*x1 + 0.8*a1 - 0.65*a2";
  std::string mu2 =
      "2.58 - 1.04*x1 + 1.21*a1 - 0.92*a1*x1 + 2.27*x2 + 1.18*a2 + 3.29*a1*a2 + 3.95*a2*x2";
  double y_sd = 1.5;
  double x1_low = -0.3;
  double x1_high = 0.7;

  // dgp1, dgp2, dgp1_monotone (dgp1 with survival increasing in a2).
  static SimConfig preset_config(const std::string& name);
  static std::vector<std::string> preset_names();
};

class TrueModel {
 public:
  explicit TrueModel(const SimConfig& config);

  const SimConfig& config() const { return config_; }
  double e1(int a1, double x1) const;  // P(A1 = a1 | x1)
  double c1(int a1, double x1) const;  // P(C1 = 0 | x1, a1)
  double p1(int a1, double x1) const;
  double x2_mean(int a1, double x1) const;
  double e2(int a1, int a2, double x1, double x2) const;
  double c2(int a1, int a2, double x1, double x2) const;
  double p2(int a1, int a2, double x1, double x2) const;
  double mu2(int a1, int a2, double x1, double x2) const;

  bool p2_uses_x2() const { return p2_uses_x2_; }
  // E[p2 | x1, a1] over X2; exact when p2 does not involve x2.
  double m_p2(int a1, int a2, double x1, int inner) const;
  // E[mu2^{a1, pi2} | x1, a1 = pi1(x1)] by quadrature over X2.
  double m_mu2(const LinearPolicy& policy, double x1, int inner) const;
  // Normal quadrature nodes for X2 | x1, a1.
  const std::vector<double>& nodes(int inner) const;

 private:
  SimConfig config_;
  LinearPredictor e1_, c1_, p1_, x2_mean_, e2_, c2_, p2_, mu2_;
  bool p2_uses_x2_ = false;
  mutable std::deque<std::vector<double>> node_cache_;
};

// n monotone trajectories. Subject i draws from the stream keyed by
// (seed, i); stage-1 and stage-2 survival use one uniform each, shared
// across arms.
Dataset simulate(const SimConfig& config, std::size_t n, std::uint64_t seed);

// Observed marginal rates. Stage-2 rates condition on reaching stage 2;
// survival rates condition on being uncensored at that stage.
struct MarginalRates {
  double censor1 = 0.0;
  double survive1 = 0.0;
  double censor2 = 0.0;
  double survive2 = 0.0;
};
MarginalRates marginal_rates(const Dataset& d);

// Nuisances under the true law. m_mu2 is available once a policy is bound.
class TrueSuite : public NuisanceSuite {
 public:
  explicit TrueSuite(const SimConfig& config, int inner = 1000)
      : model_(config), inner_(inner) {}

  double e1(int a1, Point x1) const override { return model_.e1(a1, x1[0]); }
  double c1(int a1, Point x1) const override { return model_.c1(a1, x1[0]); }
  double p1(int a1, Point x1) const override { return model_.p1(a1, x1[0]); }
  double e2(int a1, int a2, Point x1, Point x2) const override {
    return model_.e2(a1, a2, x1[0], x2[0]);
  }
  double c2(int a1, int a2, Point x1, Point x2) const override {
    return model_.c2(a1, a2, x1[0], x2[0]);
  }
  double p2(int a1, int a2, Point x1, Point x2) const override {
    return model_.p2(a1, a2, x1[0], x2[0]);
  }
  double mu2(int a1, int a2, Point x1, Point x2) const override {
    return model_.mu2(a1, a2, x1[0], x2[0]);
  }
  double m_p2(int a1, int a2, Point x1) const override {
    return model_.m_p2(a1, a2, x1[0], inner_);
  }
  bool has_m_mu2() const override { return policy_.has_value(); }
  double m_mu2(Point x1) const override;

  TrueSuite with_policy(const LinearPolicy& policy) const;
  const TrueModel& model() const { return model_; }

 private:
  TrueModel model_;
  int inner_;
  std::optional<LinearPolicy> policy_;
};

// Feature bases matching the true formulas, one fit per arm.
ModelBases correct_bases(const SimConfig& config);

struct TrueValue {
  double value = 0.0;
  double se = 0.0;  // Monte Carlo standard error
};

// Plug-in of the identification formula with true nuisances over m
// stratified X1 draws; inner normal quadrature nodes for X2.
TrueValue true_value(const LinearPolicy& policy, const SimConfig& config,
                     std::size_t m = 1000000, std::uint64_t seed = 0, int inner = 1000,
                     int threads = 1);

// Average of Y^pi over simulated always-survivors (all four coupled
// potential stage-2 survival indicators equal to 1).
TrueValue true_value_rejection(const LinearPolicy& policy, const SimConfig& config,
                               std::size_t m, std::uint64_t seed, int threads = 1);

// Precomputed plug-in over fixed X1 and X2 nodes; value(policy) costs one
// pass over the nodes. Used as the objective for the true optimal policy.
class TruePlugin {
 public:
  TruePlugin(const SimConfig& config, std::size_t m, std::uint64_t seed, int inner);
  double value(const LinearPolicy& policy) const;
  // Principal-score weight p1^0 m_p2^00 at each X1 node.
  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& x1() const { return x1_; }
  // X2 nodes for (node i, arm a1).
  std::span<const double> x2(std::size_t i, int a1) const;

 private:
  int inner_;
  std::vector<double> x1_, w_;
  std::vector<double> x2_;                 // [i][a1][j]
  std::vector<std::array<double, 2>> mu_;  // [i][a1][j] -> mu2 for a2 = 0, 1
};

// Stratified uniform draws on [low, high).
std::vector<double> stratified_x1(const SimConfig& config, std::size_t m, std::uint64_t seed);

}  // namespace asv

#endif  // ASV_SIMULATION_HPP_
