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

// Linear policy learning by value search, the true optimal policy, and the
// percentage of correct decisions among always-survivors.

#ifndef ASV_LEARNING_HPP_
#define ASV_LEARNING_HPP_

#include <optional>
#include <string>
#include <vector>

#include "asv/estimators.hpp"
#include "asv/nuisance.hpp"
#include "asv/optimizer.hpp"
#include "asv/policy.hpp"
#include "asv/simulation.hpp"

namespace asv {

enum class Objective { kMr, kAipw };
const char* objective_name(Objective o);
Objective parse_objective(const std::string& name);

struct LearnOptions {
  Objective objective = Objective::kMr;
  DeConfig de;
  Stage2Features features;
  std::optional<ModelBases> bases;  // linear when absent
  FitOptions fit;
};

struct LearnResult {
  LinearPolicy policy;
  EstimateReport value_report;
  std::vector<double> trace;
  std::size_t evaluations = 0;
  double initial_best = 0.0;
  bool stalled = false;
};

// Splits a stacked vector into (beta1, beta2) and back.
LinearPolicy policy_from_vector(const std::vector<double>& x, int p1, Stage2Features features,
                                int p2);
// Scales each stage block to unit norm.
void project_to_spheres(std::vector<double>& x, int p1);

// Policy-free nuisances fitted once; each candidate refits m_mu2^pi and
// recomputes phi_N.
class ValueObjective {
 public:
  ValueObjective(const Dataset& d, const ScenarioSpec& spec, const LearnOptions& options);
  double operator()(const LinearPolicy& policy) const;
  EstimateReport report(const LinearPolicy& policy) const;

 private:
  const Dataset* d_;
  Objective objective_;
  Positivity pos_;
  std::optional<FittedSuite> suite_;
  std::optional<FittedAipwSuite> aipw_;
  RowCache cache_;
  std::optional<PolicyOutcomeFitter> fitter_;
  double mean_phi_d_ = 1.0;
};

LearnResult learn(const Dataset& d, const ScenarioSpec& spec, const LearnOptions& options = {});

struct TruthOptions {
  std::size_t m = 500;  // stratified X1 nodes
  int inner = 100;      // X2 quadrature nodes
};

// Maximizes the true-model plug-in over unit-sphere linear policies. The
// all-treat and never-treat policies are members of the initial population.
LinearPolicy true_optimal_policy(const SimConfig& config, const DeConfig& de,
                                 const TruthOptions& truth = {}, std::uint64_t seed = 0,
                                 Stage2Features features = {});

// Principal-score weighted agreement of the two policies over m X1 draws;
// stage-2 agreement integrated over X2 | X1, A1 = pi*_1(X1).
double pcd_as(const LinearPolicy& hat, const LinearPolicy& star, const SimConfig& config,
              std::size_t m = 100000, std::uint64_t seed = 0, int inner = 100);

}  // namespace asv

#endif  // ASV_LEARNING_HPP_
