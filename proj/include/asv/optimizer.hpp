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

// Differential evolution (rand/1/bin) maximizer.

#ifndef ASV_OPTIMIZER_HPP_
#define ASV_OPTIMIZER_HPP_

#include <cstdint>
#include <functional>
#include <vector>

namespace asv {

struct DeConfig {
  int pop_factor = 15;  // population = pop_factor * dim
  double F = 0.8;
  double CR = 0.9;
  int max_gen = 200;
  int stall_gen = 30;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct DeResult {
  std::vector<double> best;
  double best_value = 0.0;
  std::vector<double> trace;  // best value after each generation (0 = initial)
  std::size_t evaluations = 0;
  std::size_t failures = 0;   // objective threw; scored -inf
  bool stalled = false;       // stopped early on stagnation
  double initial_best = 0.0;
};

// Maximizes objective(project(x)). The initial population is uniform on
// [-1, 1]^dim; `seeds` are appended members evaluated as given.
DeResult differential_evolution(int dim,
                                const std::function<double(const std::vector<double>&)>& objective,
                                const std::function<void(std::vector<double>&)>& project,
                                const DeConfig& config,
                                const std::vector<std::vector<double>>& seeds = {});

}  // namespace asv

#endif  // ASV_OPTIMIZER_HPP_
