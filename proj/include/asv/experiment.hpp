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

// Replicated evaluation and learning experiments on simulated data.

#ifndef ASV_EXPERIMENT_HPP_
#define ASV_EXPERIMENT_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "asv/learning.hpp"
#include "asv/simulation.hpp"

namespace asv {

struct ReplicationRecord {
  std::string scenario;
  std::size_t n = 0;
  int rep = 0;
  std::string estimator;
  double value = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool covered = false;
  double pcd_as = std::numeric_limits<double>::quiet_NaN();
  double true_value = std::numeric_limits<double>::quiet_NaN();  // V(learned policy)
  bool failed = false;
  std::string error;
};

struct ReplicationSummary {
  std::string estimator;
  std::string scenario;
  std::size_t n = 0;
  int reps = 0;
  std::size_t failures = 0;
  double truth = 0.0;
  std::vector<double> values;
  double mean = 0.0;
  double bias = 0.0;
  std::optional<double> se;  // sample sd of values; absent below two values
  double coverage = 0.0;
  std::optional<double> pcd_mean, pcd_sd;
  std::optional<double> mean_true_value;

  std::string to_json() const;
};

// Summaries from records sharing (estimator, scenario, n).
std::vector<ReplicationSummary> summarize(const std::vector<ReplicationRecord>& records,
                                          double truth);

struct OpeOptions {
  SimConfig config;
  std::vector<std::string> scenarios = {"M1", "M2", "M3", "M4", "M5", "M6"};
  std::vector<std::size_t> n_list = {2000, 5000};
  int reps = 500;
  LinearPolicy policy;
  std::uint64_t seed = 0;
  std::vector<std::string> estimators = {"mr"};  // mr, q_plugin, ipw, aipw
  FitOptions fit;
  int bootstrap = 0;
  std::size_t truth_m = 200000;
  int truth_inner = 1000;
  int threads = 1;
};

struct ExperimentResult {
  double truth = 0.0;
  std::vector<ReplicationRecord> records;
  std::vector<ReplicationSummary> summaries;
};

ExperimentResult run_ope_experiment(const OpeOptions& options);

struct OplOptions {
  SimConfig config;
  std::string scenario = "M1";
  std::vector<std::size_t> n_list = {2000, 5000};
  int reps = 500;
  std::vector<Objective> objectives = {Objective::kMr, Objective::kAipw};
  std::uint64_t seed = 0;
  DeConfig de;
  FitOptions fit;
  TruthOptions optimum;               // plug-in used to find the true optimum
  std::size_t value_m = 20000;        // V(policy) nodes
  int value_inner = 400;
  std::size_t pcd_m = 100000;
  int threads = 1;
};

struct OplResult {
  LinearPolicy optimal;
  double optimal_value = 0.0;
  std::vector<ReplicationRecord> records;
  std::vector<ReplicationSummary> summaries;
};

OplResult run_opl_experiment(const OplOptions& options);

void write_records_csv(const std::vector<ReplicationRecord>& records, const std::string& path);
// One JSON file per summary, named <prefix>_<estimator>_<scenario>_n<n>.json.
std::vector<std::string> write_summaries(const std::vector<ReplicationSummary>& summaries,
                                         const std::string& prefix);

}  // namespace asv

#endif  // ASV_EXPERIMENT_HPP_
