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

#include "asv/nuisance.hpp"

#include <gtest/gtest.h>

#include "asv/error.hpp"
#include "asv/estimators.hpp"
#include "asv/numeric.hpp"
#include "asv/simulation.hpp"
#include "test_util.hpp"

namespace asv {
namespace {

const std::vector<double> kZero = {0.0};

FunctionSuite constant_suite(double prob, double mean) {
  FunctionSuite s;
  s.f_e1 = s.f_c1 = s.f_p1 = [prob](int, Point) { return prob; };
  s.f_e2 = s.f_c2 = s.f_p2 = [prob](int, int, Point, Point) { return prob; };
  s.f_mu2 = [mean](int, int, Point, Point) { return mean; };
  s.f_m_p2 = [prob](int, int, Point) { return prob; };
  s.f_m_mu2 = [mean](Point) { return mean; };
  return s;
}

TEST(EvaluateTest, TrimsProbabilities) {
  const FunctionSuite s = constant_suite(0.999999, 0.0);
  EXPECT_DOUBLE_EQ(evaluate(s, NuisanceId::kP2, {1, 1}, kZero, kZero, {}), 0.99);
  EXPECT_DOUBLE_EQ(evaluate(constant_suite(1e-9, 0.0), NuisanceId::kE1, {0, 0}, kZero, kZero, {}),
                   0.01);
}

TEST(EvaluateTest, ClipsMeans) {
  const FunctionSuite s = constant_suite(0.5, 80.0);
  Positivity pos;
  pos.clip = 50.0;
  EXPECT_DOUBLE_EQ(evaluate(s, NuisanceId::kMu2, {1, 0}, kZero, kZero, pos), 50.0);
  EXPECT_DOUBLE_EQ(evaluate(s, NuisanceId::kMu2, {1, 0}, kZero, kZero, {}), 80.0);
}

TEST(EvaluateTest, FuzzedProbabilitiesStayInsideBounds) {
  const Dataset d = simulate(SimConfig::preset_config("dgp1"), 3000, 4);
  const FittedSuite s = fit_suite(d, ScenarioSpec::preset("M1"));
  Positivity pos;
  pos.eps = 0.05;
  const NuisanceId probs[] = {NuisanceId::kE1, NuisanceId::kC1, NuisanceId::kP1,
                              NuisanceId::kE2, NuisanceId::kC2, NuisanceId::kP2,
                              NuisanceId::kMP2};
  SplitMix64 rng(8);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> x1 = {6.0 * rng.uniform() - 3.0};
    const std::vector<double> x2 = {12.0 * rng.uniform() - 6.0};
    const Arm arm{rng.uniform() < 0.5 ? 0 : 1, rng.uniform() < 0.5 ? 0 : 1};
    for (NuisanceId id : probs) {
      const double p = evaluate(s, id, arm, x1, x2, pos);
      EXPECT_GE(p, 0.05);
      EXPECT_LE(p, 0.95);
    }
  }
}

class Dgp1FitTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = new SimConfig(SimConfig::preset_config("dgp1"));
    data_ = new Dataset(simulate(*config_, 100000, 21));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete config_;
  }
  static SimConfig* config_;
  static Dataset* data_;
};
SimConfig* Dgp1FitTest::config_ = nullptr;
Dataset* Dgp1FitTest::data_ = nullptr;

TEST_F(Dgp1FitTest, StageOneModelsAtOrigin) {
  const FittedSuite s = fit_suite(*data_, ScenarioSpec::preset("M1"), correct_bases(*config_));
  EXPECT_NEAR(s.e1(1, kZero), logistic(0.3), 0.01);
  EXPECT_NEAR(s.p1(0, kZero), 0.5, 0.03);
}

TEST_F(Dgp1FitTest, SmallSampleSurvival) {
  const Dataset small = simulate(*config_, 5000, 22);
  const FittedSuite s = fit_suite(small, ScenarioSpec::preset("M1"), correct_bases(*config_));
  EXPECT_NEAR(s.p1(0, kZero), 0.5, 0.03);
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) EXPECT_TRUE(s.m_p2_fitted(a1, a2));
  }
}

TEST_F(Dgp1FitTest, MisspecifiedScenarioUsesInterceptOnly) {
  const Dataset small = simulate(*config_, 5000, 23);
  const FittedSuite s = fit_suite(small, ScenarioSpec::preset("M6"), correct_bases(*config_));
  EXPECT_EQ(s.e1_model().feature_map().size(), 1u);
  ASSERT_TRUE(s.p1_model(0).has_value());
  EXPECT_EQ(s.p1_model(0)->feature_map().size(), 1u);
  const FittedSuite m1 = fit_suite(small, ScenarioSpec::preset("M1"), correct_bases(*config_));
  EXPECT_GT(m1.e1_model().feature_map().size(), 1u);
}

TEST(FitSuiteTest, AllTreatedRaisesEmptyStratum) {
  Dataset d = simulate(SimConfig::preset_config("dgp1"), 500, 3);
  for (Trajectory& t : d.rows) t.a1 = 1;
  EXPECT_THROW(fit_suite(d, ScenarioSpec::preset("M1")), EmptyStratum);
}

TEST(ScenarioTest, PresetsAndUnknownName) {
  EXPECT_EQ(ScenarioSpec::preset_names().size(), 6u);
  EXPECT_TRUE(ScenarioSpec::preset("M1").correct(NuisanceId::kMu2));
  EXPECT_FALSE(ScenarioSpec::preset("M5").correct(NuisanceId::kMMu2));
  EXPECT_THROW(ScenarioSpec::preset("M7"), ConfigError);
}

TEST(PrincipalScoreTest, UnitSurvivalGivesOne) {
  const Dataset d = testing::fuzz_dataset(50, 1);
  const FunctionSuite s = constant_suite(1.0, 0.0);
  Positivity pos;
  pos.eps = 0;
  const double den = principal_score_denominator(d, s, pos);
  for (const Trajectory& t : d.rows) EXPECT_DOUBLE_EQ(principal_score(t.x1, s, den, pos), 1.0);
}

TEST(PrincipalScoreTest, SingleRowSelfNormalizes) {
  const Dataset d = testing::fuzz_dataset(1, 2);
  const FunctionSuite s = testing::fuzz_suite(3);
  const double den = principal_score_denominator(d, s);
  EXPECT_NEAR(principal_score(d[0].x1, s, den), 1.0, 1e-15);
}

TEST(PrincipalScoreTest, TrueDgp1AtOrigin) {
  const SimConfig config = SimConfig::preset_config("dgp1");
  const TrueSuite truth(config, 200);
  Dataset d;
  for (double x : stratified_x1(config, 1000000, 5)) {
    Trajectory t;
    t.x1 = {x};
    d.rows.push_back(t);
  }
  Positivity pos;
  pos.eps = 0;
  const double den = principal_score_denominator(d, truth, pos);
  EXPECT_NEAR(truth.p1(0, kZero), 0.5, 1e-15);
  EXPECT_NEAR(principal_score(kZero, truth, den, pos), 0.5 * truth.m_p2(0, 0, kZero) / den, 1e-12);
  EXPECT_THROW(principal_score(kZero, truth, 0.0, pos), NonpositiveDenominator);
}

TEST(PolicyOutcomeFitterTest, RowEvaluationMatchesFittedModel) {
  const Dataset d = simulate(SimConfig::preset_config("dgp1"), 2000, 6);
  const FittedSuite s = fit_suite(d, ScenarioSpec::preset("M1"));
  const PolicyOutcomeFitter fitter(d, s, Spec::kCorrect, s.bases().m, {});
  for (std::uint64_t k = 0; k < 5; ++k) {
    const LinearPolicy pi = testing::fuzz_policy(k);
    std::vector<double> rows;
    fitter.evaluate_rows(pi, rows);
    const PolicyOutcomeModel model = fitter.fit(pi);
    const FittedSuite bound = s.with_policy(d, pi);
    for (std::size_t i = 0; i < d.size(); i += 97) {
      EXPECT_NEAR(rows[i], model(d[i].x1), 1e-9);
      EXPECT_NEAR(bound.m_mu2(d[i].x1), model(d[i].x1), 1e-9);
    }
  }
}

TEST(PolicyOutcomeFitterTest, UnboundSuiteHasNoOutcomeMean) {
  const Dataset d = simulate(SimConfig::preset_config("dgp1"), 1000, 7);
  const FittedSuite s = fit_suite(d, ScenarioSpec::preset("M1"));
  EXPECT_FALSE(s.has_m_mu2());
  EXPECT_THROW(s.m_mu2(kZero), ArmNotFitted);
}

}  // namespace
}  // namespace asv
