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

#include "asv/cli.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "asv/config.hpp"
#include "asv/error.hpp"
#include "asv/estimators.hpp"
#include "asv/simulation.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace asv {
namespace {

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Simulated dataset shared by the tests in this file.
const std::string& data_path() {
  static const std::string path = [] {
    const std::string p = testing::temp_path("cli_data.csv");
    const CliRun r = cli({"simulate", "--preset", "dgp1", "--n", "1500", "--seed", "3", "--out", p});
    if (r.code != 0) throw Error("simulate failed: " + r.err);
    return p;
  }();
  return path;
}

const std::string& policy_path() {
  static const std::string path = [] {
    const std::string p = testing::temp_path("cli_policy.json");
    default_evaluation_policy().write(p);
    return p;
  }();
  return path;
}

TEST(CliTest, SimulateWritesDataAndManifest) {
  const std::string p = testing::temp_path("sim.csv");
  const CliRun r = cli({"simulate", "--preset", "dgp2", "--n", "300", "--seed", "5", "--out", p});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_csv(p), simulate(SimConfig::preset_config("dgp2"), 300, 5));
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["rows"], 300);
  const auto m = nlohmann::json::parse(slurp(p + ".manifest.json"));
  EXPECT_EQ(m["tool"], "asv");
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_EQ(m["subcommand"], "simulate");
  EXPECT_EQ(m["config"]["preset"], "dgp2");
  EXPECT_EQ(m["outputs"][0], p);
}

TEST(CliTest, ValidateReportsShape) {
  const CliRun r = cli({"validate", "--data", data_path()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["valid"], true);
  EXPECT_EQ(j["rows"], 1500);
  EXPECT_EQ(j["p1"], 1);
}

TEST(CliTest, EvaluateMatchesLibrary) {
  const CliRun r = cli({"evaluate", "--data", data_path(), "--policy", policy_path(), "--scenario",
                     "M2", "--eps", "0.02"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const Dataset d = read_csv(data_path());
  const LinearPolicy pi = default_evaluation_policy();
  FitOptions fo;
  fo.positivity.eps = 0.02;
  const FittedSuite s = fit_suite(d, ScenarioSpec::preset("M2"), pi, fo);
  EstimatorOptions eo;
  eo.positivity = fo.positivity;
  const EstimateReport want = v_mr(d, pi, s, eo);
  EXPECT_EQ(j["estimator"], "mr");
  EXPECT_DOUBLE_EQ(j["value"].get<double>(), want.value);
  EXPECT_DOUBLE_EQ(j["se"].get<double>(), want.se);
}

TEST(CliTest, EveryEstimatorRuns) {
  for (const char* est : {"mr", "q_plugin", "ipw", "ipw_hajek", "aipw"}) {
    const CliRun r = cli({"evaluate", "--data", data_path(), "--policy", policy_path(),
                       "--estimator", est, "--bootstrap", "20"});
    EXPECT_EQ(r.code, kExitOk) << est << ": " << r.err;
  }
  const CliRun bad = cli({"evaluate", "--data", data_path(), "--policy", policy_path(),
                       "--estimator", "magic"});
  EXPECT_EQ(bad.code, kExitUsage);
}

TEST(CliTest, ManifestReplaysByteForByte) {
  const std::string p = testing::temp_path("eval.json");
  const CliRun a = cli({"evaluate", "--data", data_path(), "--policy", policy_path(), "--scenario",
                     "M4", "--out", p});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const std::string first = slurp(p);
  std::filesystem::remove(p);
  const CliRun b = cli({"run", "--config", p + ".manifest.json"});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_EQ(slurp(p), first);
  EXPECT_EQ(a.out, b.out);
}

TEST(CliTest, FlagsOverrideConfigFile) {
  const std::string cfg = testing::temp_path("sim.cfg");
  const std::string p = testing::temp_path("override.csv");
  std::ofstream(cfg) << "# test config\npreset = dgp2\nn = 50\nseed = 1\nout = " << p << "\n";
  const CliRun r = cli({"simulate", "--config", cfg, "--seed", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_csv(p), simulate(SimConfig::preset_config("dgp2"), 50, 2));
}

TEST(CliTest, CrossfitAndSensitivity) {
  const CliRun cf = cli({"crossfit", "--data", data_path(), "--policy", policy_path(), "--folds",
                      "3", "--stratified-folds", "--seed", "4"});
  ASSERT_EQ(cf.code, kExitOk) << cf.err;
  const auto j = nlohmann::json::parse(cf.out);
  EXPECT_EQ(j["folds"], 3);
  EXPECT_EQ(j["fold_values"].size(), 3u);

  const std::string grid = testing::temp_path("grid.csv");
  const CliRun s = cli({"sensitivity", "--data", data_path(), "--policy", policy_path(),
                     "--rho-grid", "0.9,1", "--lambda-grid", "null,-0.1", "--bootstrap", "10",
                     "--out", grid});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  EXPECT_EQ(nlohmann::json::parse(s.out)["points"], 4);
  std::ifstream in(grid);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 5);
}

TEST(CliTest, LearnWritesPolicy) {
  const std::string p = testing::temp_path("learned.json");
  const CliRun r = cli({"learn", "--data", data_path(), "--max-gen", "3", "--out", p});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const LinearPolicy learned = LinearPolicy::read(p);
  EXPECT_EQ(learned.beta1().size(), 2u);
  EXPECT_EQ(nlohmann::json::parse(r.out)["generations"], 3);
}

TEST(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"simulate", "--n", "10"}).code, kExitUsage);
  EXPECT_EQ(cli({"simulate", "--preset", "dgp7", "--out", testing::temp_path("x.csv")}).code,
            kExitUsage);
  EXPECT_EQ(cli({"evaluate", "--data", data_path()}).code, kExitUsage);
  EXPECT_EQ(cli({"experiment", "xyz", "--out", testing::temp_path("e")}).code, kExitUsage);
  EXPECT_EQ(cli({"run"}).code, kExitUsage);
  const std::string cfg = testing::temp_path("bad.cfg");
  std::ofstream(cfg) << "no_such_key = 1\n";
  const CliRun r = cli({"validate", "--config", cfg});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("no_such_key"), std::string::npos);
}

TEST(CliTest, DataErrorsExitTwo) {
  EXPECT_EQ(cli({"validate", "--data", testing::temp_path("absent.csv")}).code, kExitData);
  const std::string bad = testing::temp_path("bad.csv");
  std::ofstream(bad) << "id,x1_1,a1,c1,s1,x2_1,a2,c2,s2,y\n0,0.1,1,1,1,,,,,\n";
  const CliRun r = cli({"validate", "--data", bad});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_FALSE(r.err.empty());
}

TEST(CliTest, HelpAndVersion) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  const CliRun v = cli({"--version"});
  EXPECT_EQ(v.code, kExitOk);
  EXPECT_NE(v.out.find(kVersion), std::string::npos);
}

TEST(CliBinaryTest, ExitStatusPropagates) {
  const char* bin = std::getenv("ASV_CLI");
  if (bin == nullptr) GTEST_SKIP() << "ASV_CLI not set";
  const std::string quiet = " >/dev/null 2>&1";
  auto status = [&](const std::string& args) {
    const int s = std::system((std::string(bin) + " " + args + quiet).c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("--version"), 0);
  EXPECT_EQ(status("validate --data " + data_path()), 0);
  EXPECT_EQ(status("bogus"), 1);
  EXPECT_EQ(status("validate --data " + testing::temp_path("absent.csv")), 2);
}

TEST(RunConfigTest, TextRoundTrip) {
  RunConfig a;
  a.set("preset", "dgp2");
  a.set("scenario", "M5");
  a.set("rho_grid", "0.5,2");
  a.set("lambda_grid", "null,0.25");
  a.set("clip", "40");
  a.set("policy.json", default_evaluation_policy().to_json());
  RunConfig b;
  b.merge_text(a.to_text());
  EXPECT_EQ(b.to_text(), a.to_text());
  EXPECT_EQ(b.rho_grid, (std::vector<double>{0.5, 2.0}));
  ASSERT_EQ(b.lambda_grid.size(), 2u);
  EXPECT_FALSE(b.lambda_grid[0].has_value());
  EXPECT_EQ(b.lambda_grid[1], 0.25);
  EXPECT_EQ(b.clip, 40.0);
  EXPECT_EQ(b.policy, default_evaluation_policy());
}

TEST(RunConfigTest, RejectsMalformedValues) {
  RunConfig c;
  EXPECT_THROW(c.set("n", "ten"), ConfigError);
  EXPECT_THROW(c.set("spec.e1", "sometimes"), ConfigError);
  EXPECT_THROW(c.set("scenario", "M9"), ConfigError);
  EXPECT_THROW(c.merge_text("just words"), ConfigError);
  EXPECT_THROW(c.merge_text("{\"tool\": \"asv\"}"), ConfigError);
}

TEST(RunConfigTest, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 12345678.9}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

}  // namespace
}  // namespace asv
