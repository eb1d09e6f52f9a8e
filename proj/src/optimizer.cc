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

#include "asv/optimizer.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "asv/error.hpp"
#include "asv/numeric.hpp"

namespace asv {

void DeConfig::validate() const {
  if (pop_factor < 1) throw ConfigError("de pop_factor must be >= 1");
  if (!(F > 0 && F <= 2)) throw ConfigError("de F must be in (0, 2]");
  if (!(CR >= 0 && CR <= 1)) throw ConfigError("de CR must be in [0, 1]");
  if (max_gen < 0) throw ConfigError("de max_gen must be >= 0");
  if (stall_gen < 1) throw ConfigError("de stall_gen must be >= 1");
}

DeResult differential_evolution(int dim,
                                const std::function<double(const std::vector<double>&)>& objective,
                                const std::function<void(std::vector<double>&)>& project,
                                const DeConfig& config,
                                const std::vector<std::vector<double>>& seeds) {
  config.validate();
  if (dim < 1) throw ConfigError("de dimension must be >= 1");
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t np = std::max<std::size_t>(4, static_cast<std::size_t>(config.pop_factor) * d);
  std::vector<std::vector<double>> pop(np, std::vector<double>(d));
  for (std::size_t i = 0; i < np; ++i) {
    SplitMix64 rng(mix_seed(config.seed, 0, i));
    for (double& v : pop[i]) v = 2.0 * rng.uniform() - 1.0;
    project(pop[i]);
  }
  for (const auto& s : seeds) {
    if (s.size() != d) throw DimensionMismatch(d, s.size());
    pop.push_back(s);
    project(pop.back());
  }
  const std::size_t size = pop.size();

  DeResult r;
  std::atomic<std::size_t> failures{0};
  auto score = [&](const std::vector<double>& x) {
    try {
      const double v = objective(x);
      if (std::isfinite(v)) return v;
    } catch (const Error&) {
    }
    ++failures;
    return -std::numeric_limits<double>::infinity();
  };

  std::vector<double> fit(size);
  parallel_for(size, config.threads, [&](std::size_t i) { fit[i] = score(pop[i]); });
  r.evaluations += size;
  std::size_t best = 0;
  for (std::size_t i = 1; i < size; ++i) {
    if (fit[i] > fit[best]) best = i;
  }
  r.initial_best = fit[best];
  r.trace.push_back(fit[best]);

  int stall = 0;
  std::vector<std::vector<double>> trial(size, std::vector<double>(d));
  std::vector<double> trial_fit(size);
  for (int g = 1; g <= config.max_gen; ++g) {
    for (std::size_t i = 0; i < size; ++i) {
      SplitMix64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(g), i));
      std::size_t a, b, c;
      do a = static_cast<std::size_t>(rng() % size); while (a == i);
      do b = static_cast<std::size_t>(rng() % size); while (b == i || b == a);
      do c = static_cast<std::size_t>(rng() % size); while (c == i || c == a || c == b);
      const auto jrand = static_cast<std::size_t>(rng() % d);
      for (std::size_t j = 0; j < d; ++j) {
        const bool cross = rng.uniform() < config.CR || j == jrand;
        trial[i][j] = cross ? pop[a][j] + config.F * (pop[b][j] - pop[c][j]) : pop[i][j];
      }
      project(trial[i]);
    }
    parallel_for(size, config.threads, [&](std::size_t i) { trial_fit[i] = score(trial[i]); });
    r.evaluations += size;
    const double before = fit[best];
    for (std::size_t i = 0; i < size; ++i) {
      if (trial_fit[i] >= fit[i]) {
        pop[i] = trial[i];
        fit[i] = trial_fit[i];
      }
      if (fit[i] > fit[best]) best = i;
    }
    r.trace.push_back(fit[best]);
    stall = fit[best] > before ? 0 : stall + 1;
    if (stall >= config.stall_gen) {
      r.stalled = true;
      break;
    }
  }
  r.best = pop[best];
  r.best_value = fit[best];
  r.failures = failures.load();
  return r;
}

}  // namespace asv
