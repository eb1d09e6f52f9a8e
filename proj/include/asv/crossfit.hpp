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

// J-fold cross-fitted multiply robust estimation.

#ifndef ASV_CROSSFIT_HPP_
#define ASV_CROSSFIT_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "asv/estimators.hpp"
#include "asv/nuisance.hpp"

namespace asv {

struct FoldPlan {
  std::vector<int> assignments;  // 1..J per row
  std::uint64_t seed = 0;
  int J = 2;

  // Rows are ordered by a seeded hash of their id and cut into contiguous
  // blocks. With `stratified`, the ordering is dealt round-robin within
  // each censoring/survival pattern.
  static FoldPlan make(const Dataset& d, int J, std::uint64_t seed, bool stratified = false);

  std::vector<std::size_t> rows(int j) const;
  std::vector<std::size_t> complement(int j) const;
};

Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows);

struct CrossfitOptions {
  bool stratified = false;
  std::optional<ModelBases> bases;  // linear when absent
  FitOptions fit;
  int threads = 1;
};

struct CrossfitResult {
  EstimateReport report;
  std::vector<double> fold_values;
  std::vector<std::size_t> fold_sizes;
};

CrossfitResult crossfit_mr(const Dataset& d, const LinearPolicy& policy,
                           const ScenarioSpec& spec, int J, std::uint64_t seed,
                           const CrossfitOptions& options = {});

inline EstimateReport crossfit_v_mr(const Dataset& d, const LinearPolicy& policy,
                                    const ScenarioSpec& spec, int J, std::uint64_t seed,
                                    const CrossfitOptions& options = {}) {
  return crossfit_mr(d, policy, spec, J, seed, options).report;
}

}  // namespace asv

#endif  // ASV_CROSSFIT_HPP_
