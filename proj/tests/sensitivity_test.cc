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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "asv/config.hpp"
#include "asv/error.hpp"
#include "asv/numeric.hpp"
#include "asv/simulation.hpp"
#include "test_util.hpp"

namespace asv {
namespace {

// Mixture form: arm-specific strata shares tilted by their rho.
OmegaWeights mixture_omega(double m00, double m01, double m10, double m11,
                           const SensitivityParams& p) {
  const double lambda = p.lambda.value_or(m00 - m01);
  OmegaWeights w;
  w.w01 = (p.rho01_0101 * (m01 - m10) + p.rho01_0111 * (m10 - m00) + m00) / m01;
  w.w10 = (p.rho10_0011 * (m10 - m01) + p.rho10_0111 * (m01 - m00) + m00) / m10;
  w.w11 = (p.rho11_0101 * (m01 - m10) + p.rho11_0011 * (m10 - m01) +
           p.rho11_0001 * (m11 - m01 - lambda) + m00) /
          m11;
  return w;
}

TEST(OmegaTest, HandExample) {
  const OmegaWeights w = omega_from_m(0.4, 0.8, 0.6, 0.9, SensitivityParams::constant(0.8));
  EXPECT_NEAR(w.w01, 0.9, 1e-15);
  EXPECT_NEAR(w.w10, 0.56 / 0.6, 1e-15);
  EXPECT_NEAR(w.w11, 0.8 / 0.9, 1e-15);
}

TEST(OmegaTest, MatchesMixtureForm) {
  SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    SensitivityParams p;
    p.rho01_0101 = 0.5 + rng.uniform();
    p.rho01_0111 = 0.5 + rng.uniform();
    p.rho10_0011 = 0.5 + rng.uniform();
    p.rho10_0111 = 0.5 + rng.uniform();
    p.rho11_0101 = 0.5 + rng.uniform();
    p.rho11_0011 = 0.5 + rng.uniform();
    p.rho11_0001 = 0.5 + rng.uniform();
    if (i % 2 == 0) p.lambda = rng.uniform() - 0.5;
    const double m00 = 0.1 + 0.2 * rng.uniform();
    const double m01 = 0.3 + 0.2 * rng.uniform();
    const double m10 = 0.5 + 0.2 * rng.uniform();
    const double m11 = 0.7 + 0.2 * rng.uniform();
    OmegaWeights got;
    try {
      got = omega_from_m(m00, m01, m10, m11, p);
    } catch (const ZeroOmega&) {
      continue;
    }
    const OmegaWeights want = mixture_omega(m00, m01, m10, m11, p);
    EXPECT_NEAR(got.w01, want.w01, 1e-12);
    EXPECT_NEAR(got.w10, want.w10, 1e-12);
    EXPECT_NEAR(got.w11, want.w11, 1e-12);
  }
}

TEST(OmegaTest, UnitRhoWithNullOffsetIsExactlyOne) {
  SplitMix64 rng(4);
  const SensitivityParams p = SensitivityParams::constant(1.0);
  for (int i = 0; i < 1000; ++i) {
    const OmegaWeights w = omega_from_m(0.01 + 0.98 * rng.uniform(), 0.01 + 0.98 * rng.uniform(),
                                        0.01 + 0.98 * rng.uniform(),
                                        0.01 + 0.98 * rng.uniform(), p);
    EXPECT_EQ(w.w01, 1.0);
    EXPECT_EQ(w.w10, 1.0);
    EXPECT_EQ(w.w11, 1.0);
  }
}

TEST(OmegaTest, ZeroWeightThrows) {
  SensitivityParams p;
  p.rho01_0101 = 0.0;
  p.rho01_0111 = 0.0;
  EXPECT_THROW(omega_from_m(0.0, 0.5, 0.5, 0.5, p), ZeroOmega);
  EXPECT_THROW(SensitivityParams::constant(0.0), ConfigError);
  EXPECT_THROW(SensitivityParams::constant(-1.0), ConfigError);
}

class SensitivityFitTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(simulate(SimConfig::preset_config("dgp1"), 2000, 5));
    suite_ = new FittedSuite(
        fit_suite(*data_, ScenarioSpec::preset("M1"), default_evaluation_policy()));
  }
  static void TearDownTestSuite() {
    delete suite_;
    delete data_;
  }
  static EstimatorOptions opts() {
    EstimatorOptions o;
    o.bootstrap = 30;
    o.seed = 2;
    return o;
  }
  static Dataset* data_;
  static FittedSuite* suite_;
};

Dataset* SensitivityFitTest::data_ = nullptr;
FittedSuite* SensitivityFitTest::suite_ = nullptr;

TEST_F(SensitivityFitTest, NullPointReproducesPlugin) {
  const LinearPolicy pi = default_evaluation_policy();
  const double base = v_q_plugin(*data_, pi, *suite_, opts()).value;
  const double v =
      v_sensitivity(*data_, pi, *suite_, SensitivityParams::constant(1.0), opts()).value;
  EXPECT_NEAR(v, base, 1e-10 * std::fabs(base));
}

TEST_F(SensitivityFitTest, HalfWeightsDoubleTheValue) {
  const LinearPolicy pi = default_evaluation_policy();
  const double base = v_q_plugin(*data_, pi, *suite_, opts()).value;
  const double v =
      v_sensitivity_omega(*data_, pi, *suite_, [](int, int, Point) { return 0.5; }, opts()).value;
  EXPECT_NEAR(v, 2.0 * base, 1e-9 * std::fabs(base));
}

TEST_F(SensitivityFitTest, ZeroOmegaFunctionThrows) {
  EXPECT_THROW(v_sensitivity_omega(*data_, default_evaluation_policy(), *suite_,
                                   [](int a1, int, Point) { return a1 == 1 ? 0.0 : 1.0; },
                                   opts()),
               ZeroOmega);
}

TEST_F(SensitivityFitTest, GridAndCsv) {
  const LinearPolicy pi = default_evaluation_policy();
  const SensitivityGrid g =
      sensitivity_grid(*data_, pi, *suite_, {0.9, 1.0}, {std::nullopt, -0.1}, opts(), 2);
  ASSERT_EQ(g.points.size(), 4u);
  EXPECT_EQ(g.points[2].rho, 1.0);
  EXPECT_FALSE(g.points[2].lambda.has_value());
  EXPECT_NEAR(g.points[2].relative_deviation, 0.0, 1e-10);
  double mx = 0.0;
  for (const SensitivityPoint& p : g.points) mx = std::max(mx, p.relative_deviation);
  EXPECT_EQ(g.max_relative_deviation, mx);

  const std::string path = testing::temp_path("grid.csv");
  write_grid_csv(g, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "rho,lambda,value,se,relative_deviation");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("0.9,null,", 0), 0u) << line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("0.9,-0.1,", 0), 0u) << line;
  int rest = 0;
  while (std::getline(in, line)) ++rest;
  EXPECT_EQ(rest, 2);
}

}  // namespace
}  // namespace asv
