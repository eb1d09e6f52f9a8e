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

#include "asv/nuisance.hpp"

#include <algorithm>
#include <cmath>

#include "asv/error.hpp"

namespace asv {
namespace {

constexpr const char* kNuisanceNames[kNumNuisances] = {
    "e1", "c1", "p1", "e2", "c2", "p2", "mu2", "m_p2", "m_mu2"};

std::string arm_label(int a1) { return "[a1=" + std::to_string(a1) + "]"; }
std::string arm_label(int a1, int a2) {
  return "[a1=" + std::to_string(a1) + ",a2=" + std::to_string(a2) + "]";
}

Eigen::MatrixXd stage1_points(const Dataset& d, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), d.p1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& x1 = d.rows[rows[i]].x1;
    for (int j = 0; j < d.p1; ++j) out(static_cast<Eigen::Index>(i), j) = x1[static_cast<std::size_t>(j)];
  }
  return out;
}

Eigen::MatrixXd stage2_points(const Dataset& d, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), d.p1 + d.p2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Trajectory& t = d.rows[rows[i]];
    for (int j = 0; j < d.p1; ++j) out(static_cast<Eigen::Index>(i), j) = t.x1[static_cast<std::size_t>(j)];
    for (int j = 0; j < d.p2; ++j) {
      out(static_cast<Eigen::Index>(i), d.p1 + j) = (*t.x2)[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

template <typename Pred>
std::vector<std::size_t> select_rows(const Dataset& d, Pred pred) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (pred(d.rows[i])) rows.push_back(i);
  }
  return rows;
}

FeatureMap choose_map(Spec s, const FeatureMap& correct) {
  switch (s) {
    case Spec::kCorrect: return correct;
    case Spec::kInterceptOnly: return FeatureMap::intercept_only(correct.variables());
    case Spec::kNoInterceptExp: return FeatureMap::exp_no_intercept(correct.variables(), 0);
  }
  return correct;
}

template <typename Label>
BinaryModel fit_binary(const Dataset& d, const std::vector<std::size_t>& rows,
                       bool stage2, const FeatureMap& map, Label label,
                       const LogisticOptions& opts, const std::string& name,
                       std::vector<std::string>& warnings) {
  if (rows.empty()) throw EmptyStratum(name);
  const Eigen::MatrixXd pts = stage2 ? stage2_points(d, rows) : stage1_points(d, rows);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = label(d.rows[rows[i]]);
  BinaryModel m = fit_binary_model(map, pts, y, opts);
  for (const std::string& w : m.meta().warnings) warnings.push_back(name + ": " + w);
  return m;
}

std::vector<double> concat(Point a, Point b) {
  std::vector<double> v(a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  return v;
}

double mean_value(const std::optional<MeanModel>& m, Point x, const char* name) {
  if (!m) throw ArmNotFitted(std::string(name) + " arm not fitted");
  return m->raw(x);
}

double binary_value(const std::optional<BinaryModel>& m, Point x, const char* name) {
  if (!m) throw ArmNotFitted(std::string(name) + " arm not fitted");
  return m->predict(x);
}

}  // namespace

const char* nuisance_name(NuisanceId id) { return kNuisanceNames[static_cast<int>(id)]; }

std::optional<NuisanceId> parse_nuisance(std::string_view name) {
  for (int i = 0; i < kNumNuisances; ++i) {
    if (name == kNuisanceNames[i]) return static_cast<NuisanceId>(i);
  }
  return std::nullopt;
}

const char* spec_name(Spec s) {
  switch (s) {
    case Spec::kCorrect: return "correct";
    case Spec::kInterceptOnly: return "intercept_only";
    case Spec::kNoInterceptExp: return "no_intercept_exp";
  }
  return "correct";
}

std::optional<Spec> parse_spec(std::string_view name) {
  if (name == "correct") return Spec::kCorrect;
  if (name == "intercept_only") return Spec::kInterceptOnly;
  if (name == "no_intercept_exp") return Spec::kNoInterceptExp;
  return std::nullopt;
}

ScenarioSpec ScenarioSpec::preset(std::string_view name) {
  ScenarioSpec s;
  s.name = std::string(name);
  auto wrong_binary = [&](NuisanceId id) { s[id] = Spec::kInterceptOnly; };
  auto wrong_mean = [&](NuisanceId id) { s[id] = Spec::kNoInterceptExp; };
  if (name == "M1") {
  } else if (name == "M2") {
    wrong_binary(NuisanceId::kP2);
    wrong_mean(NuisanceId::kMP2);
  } else if (name == "M3") {
    wrong_binary(NuisanceId::kE2);
    wrong_binary(NuisanceId::kC2);
    wrong_mean(NuisanceId::kMP2);
  } else if (name == "M4") {
    wrong_mean(NuisanceId::kMu2);
  } else if (name == "M5") {
    wrong_mean(NuisanceId::kMu2);
    wrong_mean(NuisanceId::kMMu2);
  } else if (name == "M6") {
    wrong_binary(NuisanceId::kE1);
    wrong_binary(NuisanceId::kC1);
    wrong_binary(NuisanceId::kE2);
    wrong_binary(NuisanceId::kC2);
    wrong_binary(NuisanceId::kP1);
  } else {
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
  }
  return s;
}

std::vector<std::string> ScenarioSpec::preset_names() {
  return {"M1", "M2", "M3", "M4", "M5", "M6"};
}

double Positivity::bound(double v) const {
  if (clip) return std::clamp(v, -*clip, *clip);
  return v;
}

double NuisanceSuite::m_mu2(Point) const {
  throw ArmNotFitted("m_mu2 is not materialized for any policy");
}

double FunctionSuite::m_mu2(Point x1) const {
  if (!f_m_mu2) return NuisanceSuite::m_mu2(x1);
  return f_m_mu2(x1);
}

double evaluate(const NuisanceSuite& s, NuisanceId which, Arm arm, Point x1,
                Point x2, const Positivity& pos) {
  switch (which) {
    case NuisanceId::kE1: return pos.trim(s.e1(arm.a1, x1));
    case NuisanceId::kC1: return pos.trim(s.c1(arm.a1, x1));
    case NuisanceId::kP1: return pos.trim(s.p1(arm.a1, x1));
    case NuisanceId::kE2: return pos.trim(s.e2(arm.a1, arm.a2, x1, x2));
    case NuisanceId::kC2: return pos.trim(s.c2(arm.a1, arm.a2, x1, x2));
    case NuisanceId::kP2: return pos.trim(s.p2(arm.a1, arm.a2, x1, x2));
    case NuisanceId::kMu2: return pos.bound(s.mu2(arm.a1, arm.a2, x1, x2));
    case NuisanceId::kMP2: return pos.trim(s.m_p2(arm.a1, arm.a2, x1));
    case NuisanceId::kMMu2: return pos.bound(s.m_mu2(x1));
  }
  return 0.0;
}

std::vector<std::string> stage1_names(int p1) {
  if (p1 == 1) return {"x1"};
  std::vector<std::string> names;
  for (int j = 1; j <= p1; ++j) names.push_back("x1_" + std::to_string(j));
  return names;
}

std::vector<std::string> stage2_names(int p1, int p2) {
  std::vector<std::string> names = stage1_names(p1);
  if (p2 == 1) {
    names.push_back("x2");
  } else {
    for (int j = 1; j <= p2; ++j) names.push_back("x2_" + std::to_string(j));
  }
  return names;
}

ModelBases ModelBases::linear(int p1, int p2) {
  ModelBases b;
  const auto n1 = stage1_names(p1);
  const auto n2 = stage2_names(p1, p2);
  b.e1 = b.c1 = b.p1 = FeatureMap::linear(n1);
  b.e2 = b.c2 = b.p2 = b.mu2 = FeatureMap::linear(n2);
  b.m = FeatureMap::intercept_only(n1);
  for (int j = 0; j < p1; ++j) b.m.add_spline(j);
  return b;
}

// ---------------------------------------------------------------------------
// m_mu2^pi

double PolicyOutcomeModel::arm_value(int a1, Point x1) const {
  const auto& m = arms_[static_cast<std::size_t>(a1)];
  if (!m) throw ArmNotFitted("m_mu2 arm a1=" + std::to_string(a1) + " not fitted");
  const double v = m->raw(x1);
  return clip_ ? std::clamp(v, -*clip_, *clip_) : v;
}

double PolicyOutcomeModel::operator()(Point x1) const {
  return arm_value(policy_.decide1(x1), x1);
}

PolicyOutcomeFitter::PolicyOutcomeFitter(const Dataset& d, const NuisanceSuite& suite,
                                         Spec spec, const FeatureMap& basis,
                                         const Positivity& pos)
    : data_(&d), pos_(pos) {
  mu2_.assign(d.size(), {0.0, 0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Trajectory& t = d.rows[i];
    if (!t.reached_stage2()) continue;
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int a2 = 0; a2 < 2; ++a2) {
        mu2_[i][static_cast<std::size_t>(arm_index(a1, a2))] =
            pos.bound(suite.mu2(a1, a2, t.x1, *t.x2));
      }
    }
  }
  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) all[i] = i;
  const Eigen::MatrixXd all_points = stage1_points(d, all);
  for (int a1 = 0; a1 < 2; ++a1) {
    ArmFit& arm = arms_[static_cast<std::size_t>(a1)];
    arm.rows = select_rows(d, [a1](const Trajectory& t) {
      return t.a1 == a1 && t.reached_stage2();
    });
    if (arm.rows.empty()) continue;
    arm.map = choose_map(spec, basis);
    const Eigen::MatrixXd pts = stage1_points(d, arm.rows);
    arm.map.place_knots(pts);
    const Eigen::MatrixXd x = arm.map.design(pts);
    arm.keep = independent_columns(x);
    arm.qr.compute(select_columns(x, arm.keep));
    arm.all_rows_design = select_columns(arm.map.design(all_points), arm.keep);
    arm.fitted = true;
  }
}

Eigen::VectorXd PolicyOutcomeFitter::solve(int a1, const LinearPolicy& policy) const {
  const ArmFit& arm = arms_[static_cast<std::size_t>(a1)];
  Eigen::VectorXd target(static_cast<Eigen::Index>(arm.rows.size()));
  for (std::size_t i = 0; i < arm.rows.size(); ++i) {
    const Trajectory& t = data_->rows[arm.rows[i]];
    const int a2 = policy.decide2(t.x1, a1, *t.x2);
    target(static_cast<Eigen::Index>(i)) =
        mu2_[arm.rows[i]][static_cast<std::size_t>(arm_index(a1, a2))];
  }
  return arm.qr.solve(target);
}

void PolicyOutcomeFitter::evaluate_rows(const LinearPolicy& policy,
                                        std::vector<double>& out) const {
  std::array<Eigen::VectorXd, 2> coef;
  for (int a1 = 0; a1 < 2; ++a1) {
    if (arms_[static_cast<std::size_t>(a1)].fitted) coef[static_cast<std::size_t>(a1)] = solve(a1, policy);
  }
  out.resize(data_->size());
  for (std::size_t i = 0; i < data_->size(); ++i) {
    const int a1 = policy.decide1(data_->rows[i].x1);
    const ArmFit& arm = arms_[static_cast<std::size_t>(a1)];
    if (!arm.fitted) throw EmptyStratum("m_mu2: A1=" + std::to_string(a1) + ", C1=0, S1=1");
    const double v = arm.all_rows_design.row(static_cast<Eigen::Index>(i))
                         .dot(coef[static_cast<std::size_t>(a1)]);
    out[i] = pos_.bound(v);
  }
}

PolicyOutcomeModel PolicyOutcomeFitter::fit(const LinearPolicy& policy) const {
  std::array<std::optional<MeanModel>, 2> models;
  for (int a1 = 0; a1 < 2; ++a1) {
    const ArmFit& arm = arms_[static_cast<std::size_t>(a1)];
    if (!arm.fitted) continue;
    const Eigen::VectorXd c = solve(a1, policy);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arm.map.size()));
    for (std::size_t j = 0; j < arm.keep.size(); ++j) full(arm.keep[j]) = c(static_cast<Eigen::Index>(j));
    models[static_cast<std::size_t>(a1)] = MeanModel(arm.map, full, std::nullopt);
  }
  return PolicyOutcomeModel(policy, std::move(models), pos_.clip);
}

// ---------------------------------------------------------------------------
// FittedSuite

double FittedSuite::e1(int a1, Point x1) const {
  const double p = e1_.predict(x1);
  return a1 == 1 ? p : 1.0 - p;
}
double FittedSuite::c1(int a1, Point x1) const { return binary_value(c1_[a1], x1, "c1"); }
double FittedSuite::p1(int a1, Point x1) const { return binary_value(p1_[a1], x1, "p1"); }

double FittedSuite::e2(int a1, int a2, Point x1, Point x2) const {
  const double p = binary_value(e2_[a1], concat(x1, x2), "e2");
  return a2 == 1 ? p : 1.0 - p;
}
double FittedSuite::c2(int a1, int a2, Point x1, Point x2) const {
  return binary_value(c2_[arm_index(a1, a2)], concat(x1, x2), "c2");
}
double FittedSuite::p2(int a1, int a2, Point x1, Point x2) const {
  return binary_value(p2_[arm_index(a1, a2)], concat(x1, x2), "p2");
}
double FittedSuite::mu2(int a1, int a2, Point x1, Point x2) const {
  return mean_value(mu2_[arm_index(a1, a2)], concat(x1, x2), "mu2");
}
double FittedSuite::m_p2(int a1, int a2, Point x1) const {
  return mean_value(m_p2_[arm_index(a1, a2)], x1, "m_p2");
}
double FittedSuite::m_mu2(Point x1) const {
  if (!m_mu2_) return NuisanceSuite::m_mu2(x1);
  return (*m_mu2_)(x1);
}

FittedSuite FittedSuite::with_policy(const Dataset& d, const LinearPolicy& policy) const {
  FittedSuite out = *this;
  PolicyOutcomeFitter fitter(d, *this, spec_[NuisanceId::kMMu2], bases_.m,
                             options_.positivity);
  out.m_mu2_ = fitter.fit(policy);
  return out;
}

FittedSuite fit_suite(const Dataset& d, const ScenarioSpec& spec, const ModelBases& bases,
                      const std::optional<LinearPolicy>& policy, const FitOptions& options) {
  if (d.empty()) throw EmptyStratum("dataset");
  const auto core = select_rows(d, [](const Trajectory& t) {
    return t.a1 == 0 && t.reached_stage2();
  });
  if (core.empty()) throw EmptyStratum("m_p2[a1=0,a2=0]: A1=0, C1=0, S1=1");

  FittedSuite s;
  s.spec_ = spec;
  s.bases_ = bases;
  s.options_ = options;
  const LogisticOptions& lo = options.logistic;
  const Positivity& pos = options.positivity;
  auto& warn = s.warnings_;

  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) all[i] = i;
  s.e1_ = fit_binary(d, all, false, choose_map(spec[NuisanceId::kE1], bases.e1),
                     [](const Trajectory& t) { return t.a1; }, lo, "e1", warn);

  for (int a1 = 0; a1 < 2; ++a1) {
    const auto arm_rows = select_rows(d, [a1](const Trajectory& t) { return t.a1 == a1; });
    s.c1_[a1] = fit_binary(d, arm_rows, false, choose_map(spec[NuisanceId::kC1], bases.c1),
                           [](const Trajectory& t) { return 1 - t.c1; }, lo,
                           "c1" + arm_label(a1), warn);
    const auto unc = select_rows(d, [a1](const Trajectory& t) {
      return t.a1 == a1 && t.c1 == 0;
    });
    s.p1_[a1] = fit_binary(d, unc, false, choose_map(spec[NuisanceId::kP1], bases.p1),
                           [](const Trajectory& t) { return *t.s1; }, lo,
                           "p1" + arm_label(a1), warn);
    const auto st2 = select_rows(d, [a1](const Trajectory& t) {
      return t.a1 == a1 && t.reached_stage2();
    });
    s.e2_[a1] = fit_binary(d, st2, true, choose_map(spec[NuisanceId::kE2], bases.e2),
                           [](const Trajectory& t) { return *t.a2; }, lo,
                           "e2" + arm_label(a1), warn);
  }

  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) {
      const int k = arm_index(a1, a2);
      const auto arm2 = select_rows(d, [a1, a2](const Trajectory& t) {
        return t.a1 == a1 && t.reached_stage2() && *t.a2 == a2;
      });
      s.c2_[k] = fit_binary(d, arm2, true, choose_map(spec[NuisanceId::kC2], bases.c2),
                            [](const Trajectory& t) { return 1 - *t.c2; }, lo,
                            "c2" + arm_label(a1, a2), warn);
      const auto unc2 = select_rows(d, [a1, a2](const Trajectory& t) {
        return t.a1 == a1 && t.reached_stage2() && *t.a2 == a2 && *t.c2 == 0;
      });
      s.p2_[k] = fit_binary(d, unc2, true, choose_map(spec[NuisanceId::kP2], bases.p2),
                            [](const Trajectory& t) { return *t.s2; }, lo,
                            "p2" + arm_label(a1, a2), warn);
      const auto obs = select_rows(d, [a1, a2](const Trajectory& t) {
        return t.a1 == a1 && t.reached_stage2() && *t.a2 == a2 && t.y.has_value();
      });
      if (obs.empty()) throw EmptyStratum("mu2" + arm_label(a1, a2));
      {
        const Eigen::MatrixXd pts = stage2_points(d, obs);
        Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
        for (std::size_t i = 0; i < obs.size(); ++i) y(static_cast<Eigen::Index>(i)) = *d.rows[obs[i]].y;
        s.mu2_[k] = fit_mean(choose_map(spec[NuisanceId::kMu2], bases.mu2), pts, y,
                             MeanKind::kLeastSquares);
        for (const auto& w : s.mu2_[k]->meta().warnings) warn.push_back("mu2" + arm_label(a1, a2) + ": " + w);
      }
    }
  }

  // m_p2: pseudo-outcome p2^{a1 a2}(x1, x2) regressed on x1 within
  // {A1 = a1, C1 = 0, S1 = 1}.
  for (int a1 = 0; a1 < 2; ++a1) {
    const auto st2 = select_rows(d, [a1](const Trajectory& t) {
      return t.a1 == a1 && t.reached_stage2();
    });
    if (st2.empty()) continue;
    const Eigen::MatrixXd pts = stage1_points(d, st2);
    for (int a2 = 0; a2 < 2; ++a2) {
      Eigen::VectorXd target(static_cast<Eigen::Index>(st2.size()));
      for (std::size_t i = 0; i < st2.size(); ++i) {
        const Trajectory& t = d.rows[st2[i]];
        target(static_cast<Eigen::Index>(i)) = pos.trim(s.p2(a1, a2, t.x1, *t.x2));
      }
      const int k = arm_index(a1, a2);
      s.m_p2_[k] = fit_mean(choose_map(spec[NuisanceId::kMP2], bases.m), pts, target,
                            MeanKind::kLeastSquares);
      for (const auto& w : s.m_p2_[k]->meta().warnings) warn.push_back("m_p2" + arm_label(a1, a2) + ": " + w);
    }
  }

  if (policy) {
    PolicyOutcomeFitter fitter(d, s, spec[NuisanceId::kMMu2], bases.m, pos);
    s.m_mu2_ = fitter.fit(*policy);
  }
  return s;
}

FittedSuite fit_suite(const Dataset& d, const ScenarioSpec& spec,
                      const std::optional<LinearPolicy>& policy, const FitOptions& options) {
  return fit_suite(d, spec, ModelBases::linear(d.p1, d.p2), policy, options);
}

}  // namespace asv
