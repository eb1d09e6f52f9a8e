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

#include "asv/estimators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "asv/error.hpp"
#include "asv/numeric.hpp"
#include "asv/simulation.hpp"
#include "test_util.hpp"

namespace asv {
namespace {

Trajectory observed_row(int a1, int a2, double y) {
  Trajectory t;
  t.x1 = {0.1};
  t.a1 = a1;
  t.c1 = 0;
  t.s1 = 1;
  t.x2 = std::vector<double>{0.2};
  t.a2 = a2;
  t.c2 = 0;
  t.s2 = 1;
  t.y = y;
  return t;
}

FunctionSuite flat_suite(double prob, double mean) {
  FunctionSuite s;
  s.f_e1 = s.f_c1 = s.f_p1 = [prob](int, Point) { return prob; };
  s.f_e2 = s.f_c2 = s.f_p2 = [prob](int, int, Point, Point) { return prob; };
  s.f_mu2 = [mean](int, int, Point, Point) { return mean; };
  s.f_m_p2 = [prob](int, int, Point) { return prob; };
  s.f_m_mu2 = [mean](Point) { return mean; };
  return s;
}

const LinearPolicy kTreatAll({1.0, 0.0}, {1.0, 0.0, 0.0, 0.0});

TEST(PhiTest, HandComputedDenominator) {
  const Trajectory t = observed_row(0, 0, 1.0);
  EXPECT_NEAR(phi_d_value(t, 0.5, 0.5, 0.4, 0.8), 2.0, 1e-15);
}

TEST(PhiTest, HandComputedNumerator) {
  EXPECT_NEAR(phi_n_value(2.0, 0.4, 2.0, 2.0, 1.0, 1.5, 2.0), 3.2, 1e-15);
  EXPECT_NEAR(eif(3.2, 2.0, 1.5, 0.4), 0.5, 1e-15);
}

TEST(PhiTest, TreatedFirstStageReducesToScore) {
  const FunctionSuite s = testing::fuzz_suite(3);
  const Dataset d = testing::fuzz_dataset(2000, 5);
  Positivity pos;
  for (const Trajectory& t : d.rows) {
    if (t.a1 != 1 && t.c1 == 0) continue;
    const double want = pos.trim(s.p1(0, t.x1)) * pos.trim(s.m_p2(0, 0, t.x1));
    EXPECT_NEAR(phi_d(t, s, pos), want, 1e-14);
  }
}

TEST(PhiTest, OffPolicyNumeratorIsPluginTimesDenominator) {
  const FunctionSuite s = testing::fuzz_suite(4);
  const LinearPolicy pi = testing::fuzz_policy(4);
  const Dataset d = testing::fuzz_dataset(2000, 6);
  Positivity pos;
  int checked = 0;
  for (const Trajectory& t : d.rows) {
    if (pi.decide1(t.x1) == t.a1) continue;
    const EifTerms e = eif_terms(t, pi, s, pos);
    EXPECT_NEAR(e.phi_n, pos.bound(s.m_mu2(t.x1)) * e.phi_d, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(PhiTest, UnitSurvivalGivesUnitDenominator) {
  const FunctionSuite s = testing::unit_survival_suite(2);
  const Dataset d = testing::fuzz_dataset(500, 2, {.fully_observed = true});
  Positivity pos;
  pos.eps = 0.0;
  for (const Trajectory& t : d.rows) EXPECT_NEAR(phi_d(t, s, pos), 1.0, 1e-14);
}

TEST(EifVarianceTest, SymmetricPair) {
  const std::vector<double> psi = {-1.0, 1.0};
  const Interval iv = eif_variance(psi, 3.0);
  EXPECT_NEAR(iv.se, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(iv.low, 3.0 - 1.96 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(iv.high, 3.0 + 1.96 / std::sqrt(2.0), 1e-14);
}

TEST(EifVarianceTest, ZeroInfluenceHasZeroWidth) {
  const std::vector<double> psi(10, 0.0);
  const Interval iv = eif_variance(psi, 1.5);
  EXPECT_EQ(iv.se, 0.0);
  EXPECT_EQ(iv.low, 1.5);
}

TEST(RatioReportTest, ValueAndCenteredInfluence) {
  const std::vector<double> num = {1.0, 3.0, 2.0};
  const std::vector<double> den = {1.0, 1.0, 2.0};
  const EstimateReport r = ratio_report("mr", num, den);
  EXPECT_NEAR(r.value, 1.5, 1e-15);
  EXPECT_NEAR(r.mean_phi_d, 4.0 / 3.0, 1e-15);
  EXPECT_LE(std::fabs(r.mean_psi), 1e-15);
}

TEST(RatioReportTest, RejectsVanishingDenominator) {
  const std::vector<double> num = {1.0, 2.0};
  const std::vector<double> den = {0.0, 1e-12};
  EXPECT_THROW(ratio_report("mr", num, den), NonpositiveDenominator);
  EXPECT_THROW(eif(1.0, 1.0, 1.0, 0.0), NonpositiveDenominator);
}

TEST(RatioReportTest, RejectsEmptyAndMismatched) {
  const std::vector<double> a = {1.0};
  const std::vector<double> none;
  EXPECT_THROW(ratio_report("mr", none, none), EmptyStratum);
  EXPECT_THROW(ratio_report("mr", a, none), DimensionMismatch);
}

TEST(VmrTest, MatchesRowwiseRatio) {
  const FunctionSuite s = testing::fuzz_suite(11);
  const LinearPolicy pi = testing::fuzz_policy(11);
  const Dataset d = testing::fuzz_dataset(300, 11);
  EstimatorOptions opts;
  double num = 0.0, den = 0.0;
  for (const Trajectory& t : d.rows) {
    const EifTerms e = eif_terms(t, pi, s, opts.positivity);
    num += e.phi_n;
    den += e.phi_d;
  }
  const EstimateReport r = v_mr(d, pi, s, opts);
  EXPECT_NEAR(r.value, num / den, 1e-12);
  EXPECT_EQ(r.n, d.size());
  EXPECT_LE(std::fabs(r.mean_psi), 1e-12);
}

TEST(VmrTest, ReducesToAipwWithoutTruncation) {
  EstimatorOptions opts;
  opts.positivity.eps = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FunctionSuite s = testing::unit_survival_suite(seed);
    const LinearPolicy pi = testing::fuzz_policy(seed);
    const Dataset d = testing::fuzz_dataset(400, seed, {.fully_observed = true});
    const double mr = v_mr(d, pi, s, opts).value;
    const double aipw = v_aipw(d, pi, NuisanceAipwSuite(s, opts.positivity), opts).value;
    EXPECT_NEAR(mr, aipw, 1e-10 * std::max(1.0, std::fabs(aipw))) << "seed " << seed;
  }
}

TEST(VmrTest, ZeroControlSurvivalThrows) {
  FunctionSuite s = flat_suite(0.5, 1.0);
  s.f_p1 = [](int, Point) { return 0.0; };
  Dataset d;
  d.rows = {observed_row(1, 1, 2.0), observed_row(1, 0, 1.0)};
  EstimatorOptions opts;
  opts.positivity.eps = 0.0;
  EXPECT_THROW(v_mr(d, kTreatAll, s, opts), NonpositiveDenominator);
}

TEST(VmrTest, EmptyDatasetThrows) {
  EXPECT_THROW(v_mr(Dataset{}, kTreatAll, flat_suite(0.5, 1.0)), EmptyStratum);
}

TEST(QPluginTest, ConstantOutcomeRegression) {
  const Dataset d = testing::fuzz_dataset(200, 1);
  const FunctionSuite s = flat_suite(0.5, 4.25);
  EstimatorOptions opts;
  opts.bootstrap = 20;
  const EstimateReport r = v_q_plugin(d, kTreatAll, s, opts);
  EXPECT_NEAR(r.value, 4.25, 1e-14);
  EXPECT_NEAR(r.se, 0.0, 1e-12);
}

TEST(IpwTest, SingleConcordantRowHajek) {
  Dataset d;
  d.rows = {observed_row(1, 1, 7.5)};
  EstimatorOptions opts;
  opts.ipw_form = IpwForm::kHajek;
  opts.bootstrap = 10;
  EXPECT_NEAR(v_ipw(d, kTreatAll, flat_suite(0.3, 0.0), opts).value, 7.5, 1e-14);
}

TEST(IpwTest, RatioFormWeights) {
  Dataset d;
  d.rows = {observed_row(1, 1, 2.0), observed_row(0, 1, 5.0)};
  EstimatorOptions opts;
  opts.bootstrap = 10;
  // w1 = 1 / (0.5 * 0.5 * 0.5), same for w2; only the first row is concordant.
  const double w = 8.0 * 8.0;
  EXPECT_NEAR(v_ipw(d, kTreatAll, flat_suite(0.5, 0.0), opts).value, w * 2.0 / 2.0, 1e-12);
}

TEST(AipwTest, SingleRowWithExactRegressions) {
  Dataset d;
  d.rows = {observed_row(1, 1, 3.0)};
  const FunctionSuite s = flat_suite(0.4, 3.0);
  EstimatorOptions opts;
  EXPECT_NEAR(v_aipw(d, kTreatAll, NuisanceAipwSuite(s, opts.positivity), opts).value, 3.0,
              1e-14);
}

TEST(TrueNuisanceTest, InfluenceFunctionIsCentered) {
  const SimConfig cfg = SimConfig::preset_config("dgp1");
  const LinearPolicy pi({0.94, 0.35}, {-0.52, 0.0, 0.81, 0.26});
  constexpr int kInner = 100;
  const TrueSuite suite = TrueSuite(cfg, kInner).with_policy(pi);
  const double v = true_value(pi, cfg, 200000, 3, kInner).value;
  const Dataset d = simulate(cfg, 1000000, 17);
  Positivity pos;
  pos.eps = 0.0;
  std::vector<double> phin(d.size()), phid(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const EifTerms e = eif_terms(d.rows[i], pi, suite, pos);
    phin[i] = e.phi_n;
    phid[i] = e.phi_d;
  }
  const double dbar = mean(phid);
  std::vector<double> psi(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) psi[i] = (phin[i] - v * phid[i]) / dbar;
  const double m = mean(psi);
  const double se = eif_variance(psi, 0.0).se;
  EXPECT_LE(std::fabs(m), 3.0 * se) << "mean " << m << " se " << se;
}

}  // namespace
}  // namespace asv
