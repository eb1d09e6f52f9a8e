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

// Always-survivor value estimators: multiply robust (EIF ratio), outcome
// regression plug-in, IPW, and the death-as-censoring AIPW baseline.

#ifndef ASV_ESTIMATORS_HPP_
#define ASV_ESTIMATORS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asv/nuisance.hpp"
#include "asv/policy.hpp"
#include "asv/trajectory.hpp"

namespace asv {

inline constexpr double kMinDenominator = 1e-8;

struct EstimateReport {
  std::string estimator;
  double value = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
  double mean_phi_d = 0.0;
  double mean_psi = 0.0;  // EIF ratio estimators only
  std::size_t trimmed = 0;
  std::vector<std::string> warnings;

  std::string to_json() const;
};

enum class IpwForm {
  kRatio,  // mean(Q_S1 W Y) / mean(Q_S1)
  kHajek,  // sum(Q_S1 W Y) / sum(Q_S1 W)
};

struct EstimatorOptions {
  Positivity positivity;
  int bootstrap = 200;
  std::uint64_t seed = 0;
  IpwForm ipw_form = IpwForm::kRatio;
};

// Per-row quantities of the EIF.
struct EifTerms {
  double q_s1 = 0.0, q_s2 = 0.0;
  double q_y1 = 0.0, q_y2 = 0.0, q_y3 = 0.0;
  double phi_d = 0.0, phi_n = 0.0;
};

// phi_D from already-evaluated nuisances. phi2_00 and q_s2 are read only
// when their indicator gates are open.
double phi_d_value(const Trajectory& t, double phi1_0, double phi2_00, double q_s1,
                   double q_s2);
// phi_N = q_y1 phi_D + [w1 (q_y2 - q_y1) + w1 w2 (y - q_y2)] q_s1, where w_j
// already include the policy-concordance gates.
double phi_n_value(double phi_d, double q_s1, double w1, double w2, double q_y1,
                   double q_y2, double y);

double phi_d(const Trajectory& t, const NuisanceSuite& suite, const Positivity& pos = {});
double phi_n(const Trajectory& t, const LinearPolicy& policy, const NuisanceSuite& suite,
             const Positivity& pos = {});
EifTerms eif_terms(const Trajectory& t, const LinearPolicy& policy,
                   const NuisanceSuite& suite, const Positivity& pos = {});

// Empirical mean of p1^0 m_p2^00 over the rows.
double principal_score_denominator(const Dataset& d, const NuisanceSuite& suite,
                                   const Positivity& pos = {});
double principal_score(Point x1, const NuisanceSuite& suite, double denominator,
                       const Positivity& pos = {});

double eif(double phi_n, double phi_d, double v_hat, double d_hat);
double eif(const Trajectory& t, const LinearPolicy& policy, const NuisanceSuite& suite,
           double v_hat, double d_hat, const Positivity& pos = {});

struct Interval {
  double se = 0.0;
  double low = 0.0;
  double high = 0.0;
};
// se = sqrt(mean(psi^2) / n); interval value +/- 1.96 se.
Interval eif_variance(std::span<const double> psi, double value);

// Policy-free per-row pieces, shared by every candidate policy.
struct RowCache {
  std::vector<double> phi_d;
  std::vector<double> q_s1;
  // (1 - c1) s1 / (phi1 p1) at the observed a1; 0 when stage 2 not reached.
  std::vector<double> w1;
  // (1 - c2) s2 / (phi2 p2) at the observed arms; 0 when y unobserved.
  std::vector<double> w2;
  // mu2 at (observed a1, a2) for a2 = 0, 1.
  std::vector<std::array<double, 2>> mu2;
  std::size_t trimmed = 0;
};

RowCache build_mr_cache(const Dataset& d, const NuisanceSuite& suite, const Positivity& pos);

// phi_N for every row given m_mu2^pi at every row.
void phi_n_rows(const Dataset& d, const RowCache& cache, const LinearPolicy& policy,
                std::span<const double> m_mu2, std::vector<double>& out);

// Ratio estimator mean(num) / mean(den) with EIF-based standard error.
EstimateReport ratio_report(const std::string& name, std::span<const double> num,
                            std::span<const double> den);

// Largest |mean psi| seen by ratio_report in this process.
double max_abs_mean_psi();

EstimateReport v_mr(const Dataset& d, const LinearPolicy& policy, const NuisanceSuite& suite,
                    const EstimatorOptions& opts = {});
EstimateReport v_q_plugin(const Dataset& d, const LinearPolicy& policy,
                          const NuisanceSuite& suite, const EstimatorOptions& opts = {});
EstimateReport v_ipw(const Dataset& d, const LinearPolicy& policy, const NuisanceSuite& suite,
                     const EstimatorOptions& opts = {});

// Bootstrap ratio sum(num[idx]) / sum(den[idx]) over resampled rows.
EstimateReport bootstrap_ratio_report(const std::string& name, std::span<const double> num,
                                      std::span<const double> den, int replicates,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Death-as-censoring AIPW. phi~_k = e_k P(C~_k = 0 | ...), with C~_k = 1 when
// censored or dead at stage k.

class AipwSuite {
 public:
  virtual ~AipwSuite() = default;
  virtual double phi1(int a1, Point x1) const = 0;
  virtual double phi2(int a1, int a2, Point x1, Point x2) const = 0;
  virtual double q2(int a1, int a2, Point x1, Point x2) const = 0;
  virtual double q1(Point x1) const = 0;  // bound to one policy
};

// phi~ = e c p, Q2 = mu2, Q1 = m_mu2 of a principal-stratum suite.
class NuisanceAipwSuite : public AipwSuite {
 public:
  NuisanceAipwSuite(const NuisanceSuite& s, const Positivity& pos) : s_(&s), pos_(pos) {}
  double phi1(int a1, Point x1) const override;
  double phi2(int a1, int a2, Point x1, Point x2) const override;
  double q2(int a1, int a2, Point x1, Point x2) const override { return s_->mu2(a1, a2, x1, x2); }
  double q1(Point x1) const override { return s_->m_mu2(x1); }

 private:
  const NuisanceSuite* s_;
  Positivity pos_;
};

class FittedAipwSuite : public AipwSuite {
 public:
  double phi1(int a1, Point x1) const override;
  double phi2(int a1, int a2, Point x1, Point x2) const override;
  double q2(int a1, int a2, Point x1, Point x2) const override;
  double q1(Point x1) const override;

  // Stage-1 mean regression view used to fit Q1^pi.
  const NuisanceSuite& outcome_suite() const { return *outcome_; }
  FittedAipwSuite with_policy(const Dataset& d, const LinearPolicy& policy) const;
  const Positivity& positivity() const { return pos_; }

 private:
  friend FittedAipwSuite fit_aipw_suite(const Dataset&, const ScenarioSpec&,
                                        const ModelBases&, const std::optional<LinearPolicy>&,
                                        const FitOptions&);
  std::shared_ptr<const NuisanceSuite> outcome_;
  BinaryModel e1_;
  std::array<std::optional<BinaryModel>, 2> ct1_, e2_;
  std::array<std::optional<BinaryModel>, 4> ct2_;
  Spec q1_spec_ = Spec::kCorrect;
  FeatureMap q1_basis_;
  std::optional<PolicyOutcomeModel> q1_;
  Positivity pos_;
};

FittedAipwSuite fit_aipw_suite(const Dataset& d, const ScenarioSpec& spec,
                               const ModelBases& bases,
                               const std::optional<LinearPolicy>& policy = std::nullopt,
                               const FitOptions& options = {});

RowCache build_aipw_cache(const Dataset& d, const AipwSuite& suite, const Positivity& pos);

EstimateReport v_aipw(const Dataset& d, const LinearPolicy& policy, const AipwSuite& suite,
                      const EstimatorOptions& opts = {});

}  // namespace asv

#endif  // ASV_ESTIMATORS_HPP_
