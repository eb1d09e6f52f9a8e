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

#include "asv/learning.hpp"

#include <cmath>

#include "asv/error.hpp"

namespace asv {

const char* objective_name(Objective o) { return o == Objective::kMr ? "mr" : "aipw"; }

Objective parse_objective(const std::string& name) {
  if (name == "mr") return Objective::kMr;
  if (name == "aipw") return Objective::kAipw;
  throw ConfigError("unknown objective '" + name + "'");
}

LinearPolicy policy_from_vector(const std::vector<double>& x, int p1, Stage2Features features,
                                int p2) {
  const auto k1 = static_cast<std::size_t>(p1 + 1);
  const auto k2 = static_cast<std::size_t>(features.dim(p1, p2) + 1);
  if (x.size() != k1 + k2) throw DimensionMismatch(k1 + k2, x.size());
  return LinearPolicy(std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k1)),
                      std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(k1), x.end()),
                      features);
}

void project_to_spheres(std::vector<double>& x, int p1) {
  const auto k1 = static_cast<std::size_t>(p1 + 1);
  auto scale = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += x[j] * x[j];
    if (s == 0.0) return;
    s = std::sqrt(s);
    for (std::size_t j = lo; j < hi; ++j) x[j] /= s;
  };
  scale(0, k1);
  scale(k1, x.size());
}

ValueObjective::ValueObjective(const Dataset& d, const ScenarioSpec& spec,
                               const LearnOptions& options)
    : d_(&d), objective_(options.objective), pos_(options.fit.positivity) {
  const ModelBases bases = options.bases ? *options.bases : ModelBases::linear(d.p1, d.p2);
  if (objective_ == Objective::kMr) {
    suite_ = fit_suite(d, spec, bases, std::nullopt, options.fit);
    cache_ = build_mr_cache(d, *suite_, pos_);
    fitter_.emplace(d, *suite_, spec[NuisanceId::kMMu2], bases.m, pos_);
  } else {
    aipw_ = fit_aipw_suite(d, spec, bases, std::nullopt, options.fit);
    cache_ = build_aipw_cache(d, *aipw_, pos_);
    fitter_.emplace(d, aipw_->outcome_suite(), spec[NuisanceId::kMMu2], bases.m, pos_);
  }
  mean_phi_d_ = mean(cache_.phi_d);
  if (!(mean_phi_d_ > kMinDenominator)) throw NonpositiveDenominator(mean_phi_d_);
}

double ValueObjective::operator()(const LinearPolicy& policy) const {
  std::vector<double> m, phin;
  fitter_->evaluate_rows(policy, m);
  phi_n_rows(*d_, cache_, policy, m, phin);
  return mean(phin) / mean_phi_d_;
}

EstimateReport ValueObjective::report(const LinearPolicy& policy) const {
  std::vector<double> m, phin;
  fitter_->evaluate_rows(policy, m);
  phi_n_rows(*d_, cache_, policy, m, phin);
  EstimateReport r = ratio_report(objective_name(objective_), phin, cache_.phi_d);
  r.trimmed = cache_.trimmed;
  return r;
}

LearnResult learn(const Dataset& d, const ScenarioSpec& spec, const LearnOptions& options) {
  const ValueObjective objective(d, spec, options);
  const int dim = d.p1 + 1 + options.features.dim(d.p1, d.p2) + 1;
  auto eval = [&](const std::vector<double>& x) {
    return objective(policy_from_vector(x, d.p1, options.features, d.p2));
  };
  auto project = [&](std::vector<double>& x) { project_to_spheres(x, d.p1); };
  const DeResult de = differential_evolution(dim, eval, project, options.de);
  LearnResult r;
  r.policy = policy_from_vector(de.best, d.p1, options.features, d.p2);
  r.value_report = objective.report(r.policy);
  r.trace = de.trace;
  r.evaluations = de.evaluations;
  r.initial_best = de.initial_best;
  r.stalled = de.stalled;
  return r;
}

LinearPolicy true_optimal_policy(const SimConfig& config, const DeConfig& de,
                                 const TruthOptions& truth, std::uint64_t seed,
                                 Stage2Features features) {
  const TruePlugin plugin(config, truth.m, seed, truth.inner);
  const int dim = 2 + features.dim(1, 1) + 1;
  auto eval = [&](const std::vector<double>& x) {
    return plugin.value(policy_from_vector(x, 1, features, 1));
  };
  auto project = [](std::vector<double>& x) { project_to_spheres(x, 1); };
  std::vector<double> treat(static_cast<std::size_t>(dim), 0.0), never(treat);
  treat[0] = 1.0;
  treat[2] = 1.0;
  never[0] = -1.0;
  never[2] = -1.0;
  const DeResult r = differential_evolution(dim, eval, project, de, {treat, never});
  return policy_from_vector(r.best, 1, features, 1);
}

double pcd_as(const LinearPolicy& hat, const LinearPolicy& star, const SimConfig& config,
              std::size_t m, std::uint64_t seed, int inner) {
  const TrueModel model(config);
  const std::vector<double>& z = model.nodes(inner);
  SplitMix64 rng(mix_seed(seed, 0x706364ULL));
  CompensatedSum num, den;
  for (std::size_t i = 0; i < m; ++i) {
    const double x1 = config.x1_low + (config.x1_high - config.x1_low) * rng.uniform();
    const double xs[1] = {x1};
    const double w = model.p1(0, x1) * model.m_p2(0, 0, x1, inner);
    den.add(w);
    const int a1 = star.decide1(xs);
    if (hat.decide1(xs) != a1) continue;
    const double mean = model.x2_mean(a1, x1);
    std::size_t agree = 0;
    for (double zi : z) {
      const double x2[1] = {mean + config.x2_sd * zi};
      if (hat.decide2(xs, a1, x2) == star.decide2(xs, a1, x2)) ++agree;
    }
    num.add(w * static_cast<double>(agree) / static_cast<double>(z.size()));
  }
  return num.value() / den.value();
}

}  // namespace asv
