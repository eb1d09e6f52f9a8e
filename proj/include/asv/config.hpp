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

// Run configuration in a flat "key = value" text format.

#ifndef ASV_CONFIG_HPP_
#define ASV_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asv/nuisance.hpp"
#include "asv/optimizer.hpp"
#include "asv/policy.hpp"
#include "asv/simulation.hpp"

namespace asv {

inline constexpr const char* kVersion = "1.0.0";

// Evaluation policy used when an OPE run names none.
LinearPolicy default_evaluation_policy();

struct RunConfig {
  std::string subcommand;
  std::string mode;  // experiment: ope | opl
  std::string data;
  std::string out;

  SimConfig sim;
  ScenarioSpec spec = ScenarioSpec::preset("M1");
  std::optional<LinearPolicy> policy;
  Stage2Features features;
  std::string bases = "linear";  // linear | true (formulas of sim)

  std::size_t n = 2000;
  std::vector<std::size_t> n_list = {2000, 5000};
  int reps = 500;
  std::uint64_t seed = 0;
  int threads = 1;

  std::vector<std::string> scenarios = {"M1", "M2", "M3", "M4", "M5", "M6"};
  std::string estimator = "mr";
  std::vector<std::string> estimators = {"mr"};
  std::vector<std::string> objectives = {"mr", "aipw"};
  std::string objective = "mr";

  double eps = 0.01;
  std::optional<double> clip;
  int bootstrap = 200;

  int folds = 2;
  bool stratified_folds = false;

  DeConfig de;

  std::vector<double> rho_grid = {0.8, 1.0, 1.25};
  std::vector<std::optional<double>> lambda_grid = {-0.2, 0.0};

  std::size_t truth_m = 200000;
  int truth_inner = 1000;
  std::size_t optimum_m = 500;
  int optimum_inner = 100;
  std::size_t value_m = 20000;
  int value_inner = 400;
  std::size_t pcd_m = 100000;

  // Unknown keys and malformed values raise ConfigError. "preset" resets
  // every sim.* key, "scenario" every spec.* key, and "policy" reads a
  // policy file.
  void set(const std::string& key, const std::string& value);
  // Applies "key = value" lines in order; blank lines and '#' comments are
  // skipped. A leading '{' selects the manifest form.
  void merge_text(const std::string& text);
  void merge_file(const std::string& path);
  std::string to_text() const;

  Positivity positivity() const;
  FitOptions fit_options() const;
  LinearPolicy policy_or_default() const;
  ModelBases model_bases(const Dataset& d) const;
};

// {"tool", "version", "subcommand", "seed", "config": {key: value}, "outputs"}.
std::string manifest_json(const RunConfig& config, const std::vector<std::string>& outputs);
void write_manifest(const RunConfig& config, const std::vector<std::string>& outputs,
                    const std::string& path);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace asv

#endif  // ASV_CONFIG_HPP_
