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

// K-stage records and the K-stage multiply robust estimator.

#ifndef ASV_GENERAL_K_HPP_
#define ASV_GENERAL_K_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "asv/estimators.hpp"
#include "asv/nuisance.hpp"
#include "asv/policy.hpp"
#include "asv/trajectory.hpp"

namespace asv {

struct StageRecord {
  std::vector<double> x;
  int a = 0;
  int c = 0;
  std::optional<int> s;  // absent iff c = 1

  friend bool operator==(const StageRecord&, const StageRecord&) = default;
};

// stages holds the reached stages only: every stage but the last is
// uncensored and survived.
struct KTrajectory {
  std::uint64_t id = 0;
  std::vector<StageRecord> stages;
  std::optional<double> y;

  bool reached(int k) const { return static_cast<int>(stages.size()) >= k; }
  friend bool operator==(const KTrajectory&, const KTrajectory&) = default;
};

void validate(const KTrajectory& t, int K);

struct KDataset {
  std::vector<KTrajectory> rows;
  int K = 2;
  std::size_t size() const { return rows.size(); }
};

KTrajectory to_k_trajectory(const Trajectory& t);
KDataset to_k_dataset(const Dataset& d);

// Stage k (1-based) decision from x_1..x_k and a_1..a_{k-1} of t.
class KPolicy {
 public:
  virtual ~KPolicy() = default;
  virtual int decide(int k, const KTrajectory& t) const = 0;
};

class TwoStageKPolicy : public KPolicy {
 public:
  explicit TwoStageKPolicy(LinearPolicy p) : p_(std::move(p)) {}
  int decide(int k, const KTrajectory& t) const override;

 private:
  LinearPolicy p_;
};

// beta_k over (1, x_1, .., x_k, a_1, .., a_{k-1}).
class KLinearPolicy : public KPolicy {
 public:
  explicit KLinearPolicy(std::vector<std::vector<double>> betas) : betas_(std::move(betas)) {}
  int decide(int k, const KTrajectory& t) const override;

 private:
  std::vector<std::vector<double>> betas_;
};

// Trimmed nuisances at the history of t. `arms` holds a_1..a_k.
class KNuisanceSuite {
 public:
  virtual ~KNuisanceSuite() = default;
  virtual double phi(int k, const KTrajectory& t, std::span<const int> arms) const = 0;
  virtual double p(int k, const KTrajectory& t, std::span<const int> arms) const = 0;
  // Regression of the remaining all-control survival on the stage-k
  // history, without the survival prefix S_1..S_{k-1}.
  virtual double q_s(int k, const KTrajectory& t) const = 0;
  // Q_{Y,k} for k = 1..K, bound to one policy.
  virtual double q_y(int k, const KTrajectory& t) const = 0;
};

// Two-stage suite viewed as K = 2.
class TwoStageKSuite : public KNuisanceSuite {
 public:
  TwoStageKSuite(const NuisanceSuite& s, LinearPolicy policy, Positivity pos)
      : s_(&s), policy_(std::move(policy)), pos_(pos) {}
  double phi(int k, const KTrajectory& t, std::span<const int> arms) const override;
  double p(int k, const KTrajectory& t, std::span<const int> arms) const override;
  double q_s(int k, const KTrajectory& t) const override;
  double q_y(int k, const KTrajectory& t) const override;

 private:
  const NuisanceSuite* s_;
  LinearPolicy policy_;
  Positivity pos_;
};

double phi_d_k(const KTrajectory& t, const KNuisanceSuite& suite, int K);
double phi_n_k(const KTrajectory& t, const KPolicy& policy, const KNuisanceSuite& suite,
               int K, double phi_d);

EstimateReport v_mr_general_k(const KDataset& d, const KPolicy& policy,
                              const KNuisanceSuite& suite);

}  // namespace asv

#endif  // ASV_GENERAL_K_HPP_
