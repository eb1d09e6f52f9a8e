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

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

#include "asv/error.hpp"

namespace asv {
namespace {

const std::vector<std::string> kStage1Vars = {"x1", "a1"};
const std::vector<std::string> kStage2Vars = {"x1", "a1", "x2", "a2"};

double normal_from_uniform(double u) { return normal_quantile(u + 0x1.0p-54); }

// Basis over `to` from the terms of `formula`; arm variables collapse into
// the intercept or the remaining factors.
FeatureMap arm_basis(const std::string& formula, const std::vector<std::string>& from,
                     std::vector<std::string> to) {
  const LinearPredictor lp = LinearPredictor::parse(formula, from);
  FeatureMap map(to);
  map.add_term({});
  for (const Monomial& m : lp.map.terms()) {
    Monomial out;
    for (const Factor& f : m.factors) {
      const auto it = std::find(to.begin(), to.end(), from[static_cast<std::size_t>(f.var)]);
      if (it == to.end()) continue;
      out.factors.push_back({static_cast<int>(it - to.begin()), f.power, f.exp});
    }
    std::sort(out.factors.begin(), out.factors.end());
    map.add_term(std::move(out));
  }
  return map;
}

}  // namespace

SimConfig SimConfig::preset_config(const std::string& name) {
  SimConfig c;
  if (name == "dgp1") return c;
  if (name == "dgp1_monotone") {
    c.preset = name;
    c.p2 = "0.8 - 1.42*x1 + 0.8*a1 + 0.65*a2";
    return c;
  }
  if (name == "dgp2") {
    c.preset = name;
    c.e1 = "0.5 + 0.5*x1^2";
    c.c1 = "x1^2";
    c.eta1 = 2.5;
    c.p1 = "3*x1^2 + 5*a1 - 0.5*a1*x1";
    c.x2_mean = "0.5 - 0.3*x1^2 + a1 - 0.5*a1*x1";
    c.e2 = "0.7 - 0.5*x1^2 + 0.5*x2 - 0.1*x2^2";
    c.c2 = "-3 + x1 + x2 + 0.5*a2 + a2*x2";
    c.eta2 = 4.0;
    c.p2 = "0.5 + 2*x1 + x1*x2 - 0.8*a1 + 0.65*a2";
    c.mu2 = "-3 + x1 + 1.5*a1 - 0.5*a1*x1 + 0.01*exp(x2) + 1.5*a2 + a1*a2 - 0.5*a2*x2";
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> SimConfig::preset_names() { return {"dgp1", "dgp2", "dgp1_monotone"}; }

TrueModel::TrueModel(const SimConfig& config) : config_(config) {
  if (!(config.x1_high > config.x1_low)) throw ConfigError("x1 support is empty");
  if (!(config.x2_sd > 0) || !(config.y_sd >= 0)) throw ConfigError("noise sd must be positive");
  e1_ = LinearPredictor::parse(config.e1, kStage1Vars);
  c1_ = LinearPredictor::parse(config.c1, kStage1Vars);
  p1_ = LinearPredictor::parse(config.p1, kStage1Vars);
  x2_mean_ = LinearPredictor::parse(config.x2_mean, kStage1Vars);
  e2_ = LinearPredictor::parse(config.e2, kStage2Vars);
  c2_ = LinearPredictor::parse(config.c2, kStage2Vars);
  p2_ = LinearPredictor::parse(config.p2, kStage2Vars);
  mu2_ = LinearPredictor::parse(config.mu2, kStage2Vars);
  p2_uses_x2_ = std::any_of(p2_.map.terms().begin(), p2_.map.terms().end(),
                            [](const Monomial& m) { return m.involves(2); });
}

double TrueModel::e1(int a1, double x1) const {
  const std::array<double, 2> h{x1, 0.0};
  const double p = logistic(e1_(h));
  return a1 == 1 ? p : 1.0 - p;
}

double TrueModel::c1(int a1, double x1) const {
  const std::array<double, 2> h{x1, static_cast<double>(a1)};
  return logistic(c1_(h) + config_.eta1);
}

double TrueModel::p1(int a1, double x1) const {
  const std::array<double, 2> h{x1, static_cast<double>(a1)};
  return logistic(p1_(h));
}

double TrueModel::x2_mean(int a1, double x1) const {
  const std::array<double, 2> h{x1, static_cast<double>(a1)};
  return x2_mean_(h);
}

double TrueModel::e2(int a1, int a2, double x1, double x2) const {
  const std::array<double, 4> h{x1, static_cast<double>(a1), x2, 0.0};
  const double p = logistic(e2_(h));
  return a2 == 1 ? p : 1.0 - p;
}

double TrueModel::c2(int a1, int a2, double x1, double x2) const {
  const std::array<double, 4> h{x1, static_cast<double>(a1), x2, static_cast<double>(a2)};
  return logistic(c2_(h) + config_.eta2);
}

double TrueModel::p2(int a1, int a2, double x1, double x2) const {
  const std::array<double, 4> h{x1, static_cast<double>(a1), x2, static_cast<double>(a2)};
  return logistic(p2_(h));
}

double TrueModel::mu2(int a1, int a2, double x1, double x2) const {
  const std::array<double, 4> h{x1, static_cast<double>(a1), x2, static_cast<double>(a2)};
  return mu2_(h);
}

const std::vector<double>& TrueModel::nodes(int inner) const {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  for (const auto& v : node_cache_) {
    if (static_cast<int>(v.size()) == inner) return v;
  }
  node_cache_.push_back(normal_midpoint_nodes(inner));
  return node_cache_.back();
}

double TrueModel::m_p2(int a1, int a2, double x1, int inner) const {
  if (!p2_uses_x2_) return p2(a1, a2, x1, 0.0);
  const std::vector<double>& z = nodes(inner);
  const double mean = x2_mean(a1, x1);
  CompensatedSum s;
  for (double zi : z) s.add(p2(a1, a2, x1, mean + config_.x2_sd * zi));
  return s.value() / static_cast<double>(z.size());
}

double TrueModel::m_mu2(const LinearPolicy& policy, double x1, int inner) const {
  const double xs[1] = {x1};
  const int a1 = policy.decide1(xs);
  const std::vector<double>& z = nodes(inner);
  const double mean = x2_mean(a1, x1);
  CompensatedSum s;
  for (double zi : z) {
    const double x2[1] = {mean + config_.x2_sd * zi};
    const int a2 = policy.decide2(xs, a1, x2);
    s.add(mu2(a1, a2, x1, x2[0]));
  }
  return s.value() / static_cast<double>(z.size());
}

Dataset simulate(const SimConfig& config, std::size_t n, std::uint64_t seed) {
  const TrueModel m(config);
  Dataset d;
  d.p1 = 1;
  d.p2 = 1;
  d.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng(mix_seed(seed, i));
    std::array<double, 9> u;
    for (double& v : u) v = rng.uniform();
    Trajectory& t = d.rows[i];
    t.id = i;
    const double x1 = config.x1_low + (config.x1_high - config.x1_low) * u[0];
    t.x1 = {x1};
    t.a1 = u[1] < m.e1(1, x1) ? 1 : 0;
    t.c1 = u[2] < m.c1(t.a1, x1) ? 0 : 1;
    if (t.c1 == 1) continue;
    t.s1 = u[3] < m.p1(t.a1, x1) ? 1 : 0;
    if (*t.s1 == 0) continue;
    const double x2 = m.x2_mean(t.a1, x1) + config.x2_sd * normal_from_uniform(u[4]);
    t.x2 = std::vector<double>{x2};
    t.a2 = u[5] < m.e2(t.a1, 1, x1, x2) ? 1 : 0;
    t.c2 = u[6] < m.c2(t.a1, *t.a2, x1, x2) ? 0 : 1;
    if (*t.c2 == 1) continue;
    t.s2 = u[7] < m.p2(t.a1, *t.a2, x1, x2) ? 1 : 0;
    if (*t.s2 == 0) continue;
    t.y = m.mu2(t.a1, *t.a2, x1, x2) + config.y_sd * normal_from_uniform(u[8]);
  }
  return d;
}

MarginalRates marginal_rates(const Dataset& d) {
  std::size_t n = d.size(), c1 = 0, unc1 = 0, s1 = 0, reach = 0, c2 = 0, unc2 = 0, s2 = 0;
  for (const Trajectory& t : d.rows) {
    if (t.c1 == 1) {
      ++c1;
      continue;
    }
    ++unc1;
    if (*t.s1 == 0) continue;
    ++s1;
    ++reach;
    if (*t.c2 == 1) {
      ++c2;
      continue;
    }
    ++unc2;
    if (*t.s2 == 1) ++s2;
  }
  auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  return {ratio(c1, n), ratio(s1, unc1), ratio(c2, reach), ratio(s2, unc2)};
}

double TrueSuite::m_mu2(Point x1) const {
  if (!policy_) throw ArmNotFitted("true m_mu2 needs a policy");
  return model_.m_mu2(*policy_, x1[0], inner_);
}

TrueSuite TrueSuite::with_policy(const LinearPolicy& policy) const {
  TrueSuite out = *this;
  out.policy_ = policy;
  return out;
}

ModelBases correct_bases(const SimConfig& config) {
  const std::vector<std::string> s1 = stage1_names(1);
  const std::vector<std::string> s2 = stage2_names(1, 1);
  ModelBases b = ModelBases::linear(1, 1);
  b.e1 = arm_basis(config.e1, kStage1Vars, s1);
  b.c1 = arm_basis(config.c1, kStage1Vars, s1);
  b.p1 = arm_basis(config.p1, kStage1Vars, s1);
  b.e2 = arm_basis(config.e2, kStage2Vars, s2);
  b.c2 = arm_basis(config.c2, kStage2Vars, s2);
  b.p2 = arm_basis(config.p2, kStage2Vars, s2);
  b.mu2 = arm_basis(config.mu2, kStage2Vars, s2);
  return b;
}

std::vector<double> stratified_x1(const SimConfig& config, std::size_t m, std::uint64_t seed) {
  std::vector<double> x(m);
  SplitMix64 rng(mix_seed(seed, 0x7831ULL));
  const double width = config.x1_high - config.x1_low;
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = config.x1_low + width * (static_cast<double>(i) + rng.uniform()) / static_cast<double>(m);
  }
  return x;
}

TrueValue true_value(const LinearPolicy& policy, const SimConfig& config, std::size_t m,
                     std::uint64_t seed, int inner, int threads) {
  if (m < 2) throw ConfigError("true_value needs m >= 2");
  const TrueModel model(config);
  model.nodes(inner);
  const std::vector<double> x1 = stratified_x1(config, m, seed);
  std::vector<double> w(m), q(m);
  parallel_for(m, threads, [&](std::size_t i) {
    w[i] = model.p1(0, x1[i]) * model.m_p2(0, 0, x1[i], inner);
    q[i] = model.m_mu2(policy, x1[i], inner);
  });
  CompensatedSum num, den;
  for (std::size_t i = 0; i < m; ++i) {
    num.add(w[i] * q[i]);
    den.add(w[i]);
  }
  TrueValue out;
  out.value = num.value() / den.value();
  const double md = den.value() / static_cast<double>(m);
  CompensatedSum s;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = w[i] * (q[i] - out.value) / md;
    s.add(r * r);
  }
  out.se = std::sqrt(s.value() / static_cast<double>(m) / static_cast<double>(m));
  return out;
}

TrueValue true_value_rejection(const LinearPolicy& policy, const SimConfig& config,
                               std::size_t m, std::uint64_t seed, int threads) {
  const TrueModel model(config);
  std::vector<double> y(m, 0.0);
  std::vector<char> keep(m, 0);
  parallel_for(m, threads, [&](std::size_t i) {
    SplitMix64 rng(mix_seed(seed, i, 0x72656aULL));
    const double x1 = config.x1_low + (config.x1_high - config.x1_low) * rng.uniform();
    const double v1 = rng.uniform();
    const double z2 = normal_from_uniform(rng.uniform());
    const double v2 = rng.uniform();
    std::array<double, 2> x2{};
    bool all = true;
    for (int a1 = 0; a1 < 2; ++a1) {
      x2[static_cast<std::size_t>(a1)] = model.x2_mean(a1, x1) + config.x2_sd * z2;
      const bool s1 = v1 < model.p1(a1, x1);
      for (int a2 = 0; a2 < 2; ++a2) {
        all = all && s1 && v2 < model.p2(a1, a2, x1, x2[static_cast<std::size_t>(a1)]);
      }
    }
    if (!all) return;
    const double xs[1] = {x1};
    const int a1 = policy.decide1(xs);
    const double x2s[1] = {x2[static_cast<std::size_t>(a1)]};
    const int a2 = policy.decide2(xs, a1, x2s);
    keep[i] = 1;
    y[i] = model.mu2(a1, a2, x1, x2s[0]);
  });
  std::vector<double> kept;
  for (std::size_t i = 0; i < m; ++i) {
    if (keep[i]) kept.push_back(y[i]);
  }
  if (kept.size() < 2) throw EmptyStratum("always-survivors");
  TrueValue out;
  out.value = mean(kept);
  out.se = sample_sd(kept) / std::sqrt(static_cast<double>(kept.size()));
  return out;
}

TruePlugin::TruePlugin(const SimConfig& config, std::size_t m, std::uint64_t seed, int inner)
    : inner_(inner) {
  const TrueModel model(config);
  const std::vector<double>& z = model.nodes(inner);
  x1_ = stratified_x1(config, m, seed);
  w_.resize(m);
  const auto k = static_cast<std::size_t>(inner);
  x2_.resize(m * 2 * k);
  mu_.resize(m * 2 * k);
  for (std::size_t i = 0; i < m; ++i) {
    w_[i] = model.p1(0, x1_[i]) * model.m_p2(0, 0, x1_[i], inner);
    for (int a1 = 0; a1 < 2; ++a1) {
      const double mean = model.x2_mean(a1, x1_[i]);
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t at = (i * 2 + static_cast<std::size_t>(a1)) * k + j;
        x2_[at] = mean + config.x2_sd * z[j];
        mu_[at] = {model.mu2(a1, 0, x1_[i], x2_[at]), model.mu2(a1, 1, x1_[i], x2_[at])};
      }
    }
  }
}

std::span<const double> TruePlugin::x2(std::size_t i, int a1) const {
  const auto k = static_cast<std::size_t>(inner_);
  return std::span<const double>(x2_).subspan((i * 2 + static_cast<std::size_t>(a1)) * k, k);
}

double TruePlugin::value(const LinearPolicy& policy) const {
  const auto k = static_cast<std::size_t>(inner_);
  CompensatedSum num, den;
  for (std::size_t i = 0; i < x1_.size(); ++i) {
    const double xs[1] = {x1_[i]};
    const int a1 = policy.decide1(xs);
    double q = 0.0;
    const std::size_t base = (i * 2 + static_cast<std::size_t>(a1)) * k;
    for (std::size_t j = 0; j < k; ++j) {
      const double x2[1] = {x2_[base + j]};
      q += mu_[base + j][static_cast<std::size_t>(policy.decide2(xs, a1, x2))];
    }
    num.add(w_[i] * q / static_cast<double>(k));
    den.add(w_[i]);
  }
  return num.value() / den.value();
}

}  // namespace asv
