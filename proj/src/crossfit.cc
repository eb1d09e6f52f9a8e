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

#include "asv/crossfit.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "asv/error.hpp"

namespace asv {

FoldPlan FoldPlan::make(const Dataset& d, int J, std::uint64_t seed, bool stratified) {
  if (J < 2) throw ConfigError("folds must be at least 2");
  const std::size_t n = d.size();
  if (n < static_cast<std::size_t>(J)) throw ConfigError("fewer rows than folds");
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) {
    keyed[i] = {mix_seed(seed, d.rows[i].id, 0x666f6c64ULL), i};
  }
  std::sort(keyed.begin(), keyed.end());
  FoldPlan plan;
  plan.seed = seed;
  plan.J = J;
  plan.assignments.assign(n, 0);
  if (!stratified) {
    for (std::size_t r = 0; r < n; ++r) {
      plan.assignments[keyed[r].second] = static_cast<int>(r * static_cast<std::size_t>(J) / n) + 1;
    }
    return plan;
  }
  std::map<int, int> next;
  int offset = 0;
  for (const auto& [key, i] : keyed) {
    const Shape s = shape_of(d.rows[i]);
    auto it = next.find(static_cast<int>(s));
    if (it == next.end()) {
      // Each pattern starts where the previous one left off.
      it = next.emplace(static_cast<int>(s), offset).first;
      offset = (offset + 1) % J;
    }
    plan.assignments[i] = it->second + 1;
    it->second = (it->second + 1) % J;
  }
  for (int j = 1; j <= J; ++j) {
    if (plan.rows(j).empty()) throw EmptyStratum("fold", j);
  }
  return plan;
}

std::vector<std::size_t> FoldPlan::rows(int j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == j) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::complement(int j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != j) out.push_back(i);
  }
  return out;
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.p1 = d.p1;
  out.p2 = d.p2;
  out.rows.reserve(rows.size());
  for (std::size_t i : rows) out.rows.push_back(d.rows[i]);
  return out;
}

CrossfitResult crossfit_mr(const Dataset& d, const LinearPolicy& policy,
                           const ScenarioSpec& spec, int J, std::uint64_t seed,
                           const CrossfitOptions& options) {
  const FoldPlan plan = FoldPlan::make(d, J, seed, options.stratified);
  const ModelBases bases = options.bases ? *options.bases : ModelBases::linear(d.p1, d.p2);
  const Positivity& pos = options.fit.positivity;

  struct FoldOut {
    std::vector<double> num, den;
    std::size_t trimmed = 0;
    std::vector<std::string> warnings;
  };
  std::vector<FoldOut> outs(static_cast<std::size_t>(J));
  parallel_for(static_cast<std::size_t>(J), options.threads, [&](std::size_t f) {
    const int j = static_cast<int>(f) + 1;
    const Dataset train = subset(d, plan.complement(j));
    const Dataset test = subset(d, plan.rows(j));
    FittedSuite suite;
    try {
      suite = fit_suite(train, spec, bases, policy, options.fit);
    } catch (const EmptyStratum& e) {
      throw e.with_fold(j);
    }
    const RowCache c = build_mr_cache(test, suite, pos);
    std::vector<double> m(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) m[i] = pos.bound(suite.m_mu2(test.rows[i].x1));
    FoldOut& o = outs[f];
    phi_n_rows(test, c, policy, m, o.num);
    o.den = c.phi_d;
    o.trimmed = c.trimmed;
    o.warnings = suite.warnings();
  });

  CrossfitResult r;
  std::vector<double> psi;
  psi.reserve(d.size());
  CompensatedSum value;
  std::size_t trimmed = 0;
  std::vector<std::string> warnings;
  for (int j = 1; j <= J; ++j) {
    const FoldOut& o = outs[static_cast<std::size_t>(j - 1)];
    const double md = mean(o.den);
    if (!(md > kMinDenominator)) throw NonpositiveDenominator(md);
    const double v = mean(o.num) / md;
    r.fold_values.push_back(v);
    r.fold_sizes.push_back(o.num.size());
    value.add(static_cast<double>(o.num.size()) / static_cast<double>(d.size()) * v);
    for (std::size_t i = 0; i < o.num.size(); ++i) psi.push_back((o.num[i] - v * o.den[i]) / md);
    trimmed += o.trimmed;
    warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
  }
  EstimateReport& rep = r.report;
  rep.estimator = "mr_crossfit";
  rep.n = d.size();
  rep.value = value.value();
  rep.mean_psi = mean(psi);
  CompensatedSum den;
  for (const FoldOut& o : outs) {
    for (double x : o.den) den.add(x);
  }
  rep.mean_phi_d = den.value() / static_cast<double>(d.size());
  const Interval iv = eif_variance(psi, rep.value);
  rep.se = iv.se;
  rep.ci_low = iv.low;
  rep.ci_high = iv.high;
  rep.trimmed = trimmed;
  rep.warnings = std::move(warnings);
  return r;
}

}  // namespace asv
