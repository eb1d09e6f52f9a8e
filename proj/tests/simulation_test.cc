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

#include "asv/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "asv/error.hpp"
#include "asv/numeric.hpp"

namespace asv {
namespace {

const LinearPolicy kPolicy({0.94, 0.35}, {-0.52, 0.0, 0.81, 0.26});

TEST(SimulateTest, DeterministicAndPrefixStable) {
  const SimConfig cfg = SimConfig::preset_config("dgp2");
  const Dataset a = simulate(cfg, 500, 3);
  EXPECT_EQ(a, simulate(cfg, 500, 3));
  EXPECT_NE(a, simulate(cfg, 500, 4));
  const Dataset b = simulate(cfg, 100, 3);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b.rows[i], a.rows[i]);
}

TEST(SimulateTest, RowsAreValid) {
  for (const std::string& name : SimConfig::preset_names()) {
    const Dataset d = simulate(SimConfig::preset_config(name), 5000, 1);
    EXPECT_NO_THROW(validate(d)) << name;
    for (const Trajectory& t : d.rows) {
      EXPECT_GE(t.x1[0], -0.3);
      EXPECT_LT(t.x1[0], 0.7);
    }
  }
}

TEST(SimulateTest, PresetsDiffer) {
  EXPECT_THROW(SimConfig::preset_config("dgp9"), ConfigError);
  EXPECT_EQ(SimConfig::preset_config("dgp1").preset, "dgp1");
  EXPECT_EQ(SimConfig::preset_config("dgp1_monotone").p2, "0.8 - 1.42*x1 + 0.8*a1 + 0.65*a2");
}

TEST(SimulateTest, StageOneRatesMatchIntegrals) {
  for (const std::string& name : {"dgp1", "dgp2"}) {
    const SimConfig cfg = SimConfig::preset_config(name);
    const TrueModel m(cfg);
    constexpr int kGrid = 20000;
    double cens = 0.0, unc = 0.0, surv = 0.0;
    for (int i = 0; i < kGrid; ++i) {
      const double x = cfg.x1_low + (cfg.x1_high - cfg.x1_low) * (i + 0.5) / kGrid;
      for (int a = 0; a < 2; ++a) {
        cens += m.e1(a, x) * (1.0 - m.c1(a, x));
        unc += m.e1(a, x) * m.c1(a, x);
        surv += m.e1(a, x) * m.c1(a, x) * m.p1(a, x);
      }
    }
    const double want_c1 = cens / kGrid;
    const double want_s1 = surv / unc;
    const std::size_t n = 200000;
    const MarginalRates r = marginal_rates(simulate(cfg, n, 11));
    EXPECT_NEAR(r.censor1, want_c1, 4.0 * std::sqrt(want_c1 * (1 - want_c1) / n)) << name;
    EXPECT_NEAR(r.survive1, want_s1, 4.0 * std::sqrt(want_s1 * (1 - want_s1) / (n * 0.9)))
        << name;
  }
}

TEST(SimulateTest, RatesOfHandDataset) {
  Dataset d;
  Trajectory cens;
  cens.x1 = {0.0};
  cens.c1 = 1;
  Trajectory dead = cens;
  dead.c1 = 0;
  dead.s1 = 0;
  Trajectory full = dead;
  full.s1 = 1;
  full.x2 = std::vector<double>{0.0};
  full.a2 = 0;
  full.c2 = 0;
  full.s2 = 1;
  full.y = 1.0;
  d.rows = {cens, dead, full, full};
  const MarginalRates r = marginal_rates(d);
  EXPECT_DOUBLE_EQ(r.censor1, 0.25);
  EXPECT_DOUBLE_EQ(r.survive1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.censor2, 0.0);
  EXPECT_DOUBLE_EQ(r.survive2, 1.0);
}

TEST(TrueModelTest, QuadratureMatchesLinearMean) {
  // mu2 is linear in x2 under dgp1, so the always-treat regression equals
  // mu2 at the conditional mean.
  const TrueModel m(SimConfig::preset_config("dgp1"));
  const LinearPolicy treat({1.0, 0.0}, {1.0, 0.0, 0.0, 0.0});
  for (double x1 : {-0.2, 0.1, 0.6}) {
    EXPECT_NEAR(m.m_mu2(treat, x1, 400), m.mu2(1, 1, x1, m.x2_mean(1, x1)), 1e-9);
  }
  EXPECT_FALSE(m.p2_uses_x2());
  EXPECT_DOUBLE_EQ(m.m_p2(1, 0, 0.3, 10), m.p2(1, 0, 0.3, 123.0));
}

TEST(TrueModelTest, QuadratureMatchesMonteCarlo) {
  const SimConfig cfg = SimConfig::preset_config("dgp2");
  const TrueModel m(cfg);
  ASSERT_TRUE(m.p2_uses_x2());
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z;
  const double x1 = 0.25;
  double s = 0.0;
  constexpr int kDraws = 400000;
  for (int i = 0; i < kDraws; ++i) s += m.p2(0, 0, x1, m.x2_mean(0, x1) + cfg.x2_sd * z(gen));
  EXPECT_NEAR(m.m_p2(0, 0, x1, 1000), s / kDraws, 0.002);
}

TEST(TrueValueTest, StableAcrossSeeds) {
  const SimConfig cfg = SimConfig::preset_config("dgp1");
  const TrueValue a = true_value(kPolicy, cfg, 20000, 1, 200);
  const TrueValue b = true_value(kPolicy, cfg, 20000, 2, 200);
  EXPECT_NEAR(a.value, b.value, 4.0 * std::hypot(a.se, b.se) + 1e-9);
  EXPECT_EQ(a.value, true_value(kPolicy, cfg, 20000, 1, 200, 2).value);
}

TEST(TrueValueTest, PluginTableMatchesDirectComputation) {
  const SimConfig cfg = SimConfig::preset_config("dgp2");
  const TruePlugin plugin(cfg, 3000, 5, 64);
  const LinearPolicy p({0.2, -1.0}, {0.1, 0.5, 0.3, -0.8});
  EXPECT_NEAR(plugin.value(p), true_value(p, cfg, 3000, 5, 64).value, 1e-10);
}

TEST(TrueValueTest, RejectionAgreesOnMonotoneDesign) {
  const SimConfig cfg = SimConfig::preset_config("dgp1_monotone");
  const TrueValue plug = true_value(kPolicy, cfg, 200000, 3, 400);
  const TrueValue rej = true_value_rejection(kPolicy, cfg, 2000000, 4);
  EXPECT_NEAR(plug.value, rej.value, 4.0 * std::hypot(plug.se, rej.se));
}

TEST(TrueValueTest, StratifiedDrawsCoverEachCell) {
  const SimConfig cfg = SimConfig::preset_config("dgp1");
  const std::vector<double> x = stratified_x1(cfg, 100, 9);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_GE(x[i], cfg.x1_low + 0.01 * static_cast<double>(i) - 1e-12);
    EXPECT_LT(x[i], cfg.x1_low + 0.01 * static_cast<double>(i + 1) + 1e-12);
  }
  EXPECT_THROW(true_value(kPolicy, cfg, 1), ConfigError);
}

TEST(TrueSuiteTest, NeedsPolicyForOutcomeRegression) {
  const TrueSuite s(SimConfig::preset_config("dgp1"), 50);
  const double x[1] = {0.0};
  EXPECT_FALSE(s.has_m_mu2());
  EXPECT_THROW(s.m_mu2(x), ArmNotFitted);
  const TrueSuite b = s.with_policy(kPolicy);
  EXPECT_TRUE(b.has_m_mu2());
  EXPECT_DOUBLE_EQ(b.m_mu2(x), b.model().m_mu2(kPolicy, 0.0, 50));
}

TEST(CorrectBasesTest, MatchesFormulaTerms) {
  const ModelBases b = correct_bases(SimConfig::preset_config("dgp2"));
  EXPECT_GT(b.e1.size(), 1u);
  EXPECT_GT(b.mu2.size(), b.e1.size());
}

}  // namespace
}  // namespace asv
