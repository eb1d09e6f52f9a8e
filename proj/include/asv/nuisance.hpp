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

// Nuisance functions: propensity e_k, censoring c_k, survival p_k, outcome
// regression mu2, and the stage-1 means m_p2 and m_mu2^pi.

#ifndef ASV_NUISANCE_HPP_
#define ASV_NUISANCE_HPP_

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "asv/formula.hpp"
#include "asv/policy.hpp"
#include "asv/regression.hpp"
#include "asv/trajectory.hpp"

namespace asv {

enum class NuisanceId { kE1, kC1, kP1, kE2, kC2, kP2, kMu2, kMP2, kMMu2 };
inline constexpr int kNumNuisances = 9;

const char* nuisance_name(NuisanceId id);
std::optional<NuisanceId> parse_nuisance(std::string_view name);

enum class Spec { kCorrect, kInterceptOnly, kNoInterceptExp };

const char* spec_name(Spec s);
std::optional<Spec> parse_spec(std::string_view name);

struct ScenarioSpec {
  std::string name = "M1";
  std::array<Spec, kNumNuisances> flags{};

  Spec operator[](NuisanceId id) const { return flags[static_cast<int>(id)]; }
  Spec& operator[](NuisanceId id) { return flags[static_cast<int>(id)]; }
  bool correct(NuisanceId id) const { return (*this)[id] == Spec::kCorrect; }

  // M1..M6. Binary models are misspecified as intercept-only, mean models as
  // no-intercept least squares on exp(x1).
  static ScenarioSpec preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

struct Arm {
  int a1 = 0;
  int a2 = 0;
};

inline int arm_index(int a1, int a2) { return 2 * a1 + a2; }

struct Positivity {
  double eps = 0.01;            // 0 disables trimming
  std::optional<double> clip;   // |mu2|, |m_mu2| bound

  double trim(double p) const { return eps > 0 ? clamp_probability(p, eps) : p; }
  double bound(double v) const;
};

// Raw (untrimmed) nuisance evaluations. Stage-1 functions take x1, stage-2
// functions take (x1, x2). m_mu2 is bound to one policy and may be absent.
class NuisanceSuite {
 public:
  virtual ~NuisanceSuite() = default;
  virtual double e1(int a1, Point x1) const = 0;  // P(A1 = a1 | x1)
  virtual double c1(int a1, Point x1) const = 0;  // P(C1 = 0 | x1, a1)
  virtual double p1(int a1, Point x1) const = 0;  // P(S1 = 1 | x1, a1, C1 = 0)
  virtual double e2(int a1, int a2, Point x1, Point x2) const = 0;
  virtual double c2(int a1, int a2, Point x1, Point x2) const = 0;
  virtual double p2(int a1, int a2, Point x1, Point x2) const = 0;
  virtual double mu2(int a1, int a2, Point x1, Point x2) const = 0;
  virtual double m_p2(int a1, int a2, Point x1) const = 0;
  virtual bool has_m_mu2() const { return false; }
  virtual double m_mu2(Point x1) const;
};

// Trimmed / clipped evaluation: probabilities in [eps, 1 - eps], means in
// [-clip, clip]. x2 is ignored for stage-1 quantities.
double evaluate(const NuisanceSuite& suite, NuisanceId which, Arm arm, Point x1,
                Point x2, const Positivity& pos);

// Feature bases for each model class. Stage-1 maps are over x1 variables,
// stage-2 maps over (x1, x2). `m` is the stage-1 smoother for m_p2, m_mu2.
struct ModelBases {
  FeatureMap e1, c1, p1;
  FeatureMap e2, c2, p2, mu2;
  FeatureMap m;

  // Intercept plus linear terms; m is intercept plus a natural spline in
  // every x1 covariate.
  static ModelBases linear(int p1, int p2);
};

std::vector<std::string> stage1_names(int p1);
std::vector<std::string> stage2_names(int p1, int p2);

// m_mu2^pi(x1) = m^{pi1(x1)}(x1), one regression per stage-1 arm of
// mu2^{a1, pi2(x1, a1, x2)} on x1 among {A1 = a1, C1 = 0, S1 = 1}.
class PolicyOutcomeModel {
 public:
  PolicyOutcomeModel() = default;
  PolicyOutcomeModel(LinearPolicy policy, std::array<std::optional<MeanModel>, 2> arms,
                     std::optional<double> clip)
      : policy_(std::move(policy)), arms_(std::move(arms)), clip_(clip) {}

  double operator()(Point x1) const;
  double arm_value(int a1, Point x1) const;
  const LinearPolicy& policy() const { return policy_; }

 private:
  LinearPolicy policy_;
  std::array<std::optional<MeanModel>, 2> arms_;
  std::optional<double> clip_;
};

// Precomputes the per-arm design and factorization once so that refitting
// m_mu2^pi for a new policy costs one triangular solve per arm.
class PolicyOutcomeFitter {
 public:
  PolicyOutcomeFitter(const Dataset& d, const NuisanceSuite& suite, Spec spec,
                      const FeatureMap& basis, const Positivity& pos);

  // m_mu2^pi at every row of the construction dataset.
  void evaluate_rows(const LinearPolicy& policy, std::vector<double>& out) const;
  PolicyOutcomeModel fit(const LinearPolicy& policy) const;

 private:
  struct ArmFit {
    bool fitted = false;
    FeatureMap map;
    std::vector<std::size_t> rows;               // stratum rows
    std::vector<int> keep;                       // independent columns
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    Eigen::MatrixXd all_rows_design;             // design at every row
  };
  Eigen::VectorXd solve(int a1, const LinearPolicy& policy) const;

  const Dataset* data_;
  Positivity pos_;
  std::array<ArmFit, 2> arms_;
  // mu2 at all four arms for stage-2 rows (bounded).
  std::vector<std::array<double, 4>> mu2_;
};

struct FitOptions {
  LogisticOptions logistic;
  Positivity positivity;
};

class FittedSuite : public NuisanceSuite {
 public:
  double e1(int a1, Point x1) const override;
  double c1(int a1, Point x1) const override;
  double p1(int a1, Point x1) const override;
  double e2(int a1, int a2, Point x1, Point x2) const override;
  double c2(int a1, int a2, Point x1, Point x2) const override;
  double p2(int a1, int a2, Point x1, Point x2) const override;
  double mu2(int a1, int a2, Point x1, Point x2) const override;
  double m_p2(int a1, int a2, Point x1) const override;
  bool has_m_mu2() const override { return m_mu2_.has_value(); }
  double m_mu2(Point x1) const override;

  // Copy with m_mu2^pi fitted on `d` (normally the fitting data).
  FittedSuite with_policy(const Dataset& d, const LinearPolicy& policy) const;

  const ScenarioSpec& spec() const { return spec_; }
  const ModelBases& bases() const { return bases_; }
  const FitOptions& options() const { return options_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  bool m_p2_fitted(int a1, int a2) const { return m_p2_[arm_index(a1, a2)].has_value(); }
  const BinaryModel& e1_model() const { return e1_; }
  const std::optional<BinaryModel>& p1_model(int a1) const { return p1_[a1]; }

 private:
  friend FittedSuite fit_suite(const Dataset&, const ScenarioSpec&, const ModelBases&,
                               const std::optional<LinearPolicy>&, const FitOptions&);

  ScenarioSpec spec_;
  ModelBases bases_;
  FitOptions options_;
  BinaryModel e1_;
  std::array<std::optional<BinaryModel>, 2> c1_, p1_, e2_;
  std::array<std::optional<BinaryModel>, 4> c2_, p2_;
  std::array<std::optional<MeanModel>, 4> mu2_, m_p2_;
  std::optional<PolicyOutcomeModel> m_mu2_;
  std::vector<std::string> warnings_;
};

FittedSuite fit_suite(const Dataset& d, const ScenarioSpec& spec,
                      const ModelBases& bases,
                      const std::optional<LinearPolicy>& policy = std::nullopt,
                      const FitOptions& options = {});
// Linear bases.
FittedSuite fit_suite(const Dataset& d, const ScenarioSpec& spec,
                      const std::optional<LinearPolicy>& policy = std::nullopt,
                      const FitOptions& options = {});

// Suite of callables, mainly for tests and injected models.
struct FunctionSuite : NuisanceSuite {
  std::function<double(int, Point)> f_e1, f_c1, f_p1;
  std::function<double(int, int, Point, Point)> f_e2, f_c2, f_p2, f_mu2;
  std::function<double(int, int, Point)> f_m_p2;
  std::function<double(Point)> f_m_mu2;

  double e1(int a1, Point x1) const override { return f_e1(a1, x1); }
  double c1(int a1, Point x1) const override { return f_c1(a1, x1); }
  double p1(int a1, Point x1) const override { return f_p1(a1, x1); }
  double e2(int a1, int a2, Point x1, Point x2) const override { return f_e2(a1, a2, x1, x2); }
  double c2(int a1, int a2, Point x1, Point x2) const override { return f_c2(a1, a2, x1, x2); }
  double p2(int a1, int a2, Point x1, Point x2) const override { return f_p2(a1, a2, x1, x2); }
  double mu2(int a1, int a2, Point x1, Point x2) const override { return f_mu2(a1, a2, x1, x2); }
  double m_p2(int a1, int a2, Point x1) const override { return f_m_p2(a1, a2, x1); }
  bool has_m_mu2() const override { return static_cast<bool>(f_m_mu2); }
  double m_mu2(Point x1) const override;
};

}  // namespace asv

#endif  // ASV_NUISANCE_HPP_
