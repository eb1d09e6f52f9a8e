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

#include "asv/estimators.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "asv/error.hpp"
#include "json.hpp"

namespace asv {
namespace {

constexpr double kZ975 = 1.96;

std::atomic<double> g_max_abs_mean_psi{0.0};

void note_mean_psi(double v) {
  const double a = std::fabs(v);
  double cur = g_max_abs_mean_psi.load();
  while (a > cur && !g_max_abs_mean_psi.compare_exchange_weak(cur, a)) {
  }
}

// Trimmed evaluation that counts clamped probabilities.
struct Trimmer {
  const Positivity& pos;
  std::size_t count = 0;
  double operator()(double p) {
    const double t = pos.trim(p);
    if (t != p) ++count;
    return t;
  }
};

bool gate_stage1_zero(const Trajectory& t) { return t.a1 == 0 && t.c1 == 0; }
bool gate_both_zero(const Trajectory& t) {
  return gate_stage1_zero(t) && t.reached_stage2() && *t.a2 == 0 && *t.c2 == 0;
}

struct RowPieces {
  double phi_d = 0.0;
  double q_s1 = 0.0;
  double q_s2 = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  std::array<double, 2> mu2{0.0, 0.0};
};

RowPieces mr_row(const Trajectory& t, const NuisanceSuite& s, Trimmer& tr) {
  RowPieces r;
  const Point x1 = t.x1;
  const double p1_0 = tr(s.p1(0, x1));
  const double m00 = tr(s.m_p2(0, 0, x1));
  r.q_s1 = p1_0 * m00;

  double phi1_0 = 1.0;
  double phi2_00 = 1.0;
  if (gate_stage1_zero(t)) {
    phi1_0 = tr(s.e1(0, x1)) * tr(s.c1(0, x1));
    if (t.reached_stage2()) {
      r.q_s2 = tr(s.p2(0, 0, x1, *t.x2));
      if (gate_both_zero(t)) {
        phi2_00 = tr(s.e2(0, 0, x1, *t.x2)) * tr(s.c2(0, 0, x1, *t.x2));
      }
    }
  }
  r.phi_d = phi_d_value(t, phi1_0, phi2_00, r.q_s1, r.q_s2);

  if (t.reached_stage2()) {
    const int a1 = t.a1;
    const Point x2 = *t.x2;
    const double phi1 = tr(s.e1(a1, x1)) * tr(s.c1(a1, x1));
    r.w1 = 1.0 / (phi1 * tr(s.p1(a1, x1)));
    for (int a2 = 0; a2 < 2; ++a2) r.mu2[static_cast<std::size_t>(a2)] = s.mu2(a1, a2, x1, x2);
    if (t.y) {
      const int a2 = *t.a2;
      const double phi2 = tr(s.e2(a1, a2, x1, x2)) * tr(s.c2(a1, a2, x1, x2));
      r.w2 = 1.0 / (phi2 * tr(s.p2(a1, a2, x1, x2)));
    }
  }
  return r;
}

}  // namespace

std::string EstimateReport::to_json() const {
  nlohmann::ordered_json j;
  j["estimator"] = estimator;
  auto num = [](double v) -> nlohmann::ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  j["value"] = num(value);
  j["se"] = num(se);
  j["ci_low"] = num(ci_low);
  j["ci_high"] = num(ci_high);
  j["n"] = n;
  j["mean_phi_d"] = num(mean_phi_d);
  j["trimmed"] = trimmed;
  j["warnings"] = warnings;
  return j.dump(2);
}

double phi_d_value(const Trajectory& t, double phi1_0, double phi2_00, double q_s1,
                   double q_s2) {
  double v = q_s1;
  if (!gate_stage1_zero(t)) return v;
  // 1{A1 = C1 = 0} / phi1^0 terms.
  v += (-q_s1 + (t.reached_stage2() ? q_s2 : 0.0)) / phi1_0;
  if (gate_both_zero(t)) {
    const double s2 = t.s2 && *t.s2 == 1 ? 1.0 : 0.0;
    v += (s2 - q_s2) / (phi1_0 * phi2_00);
  }
  return v;
}

double phi_n_value(double phi_d, double q_s1, double w1, double w2, double q_y1,
                   double q_y2, double y) {
  double v = q_y1 * phi_d;
  if (w1 == 0.0) return v;
  double aug = w1 * (q_y2 - q_y1);
  if (w2 != 0.0) aug += w1 * w2 * (y - q_y2);
  return v + aug * q_s1;
}

EifTerms eif_terms(const Trajectory& t, const LinearPolicy& policy,
                   const NuisanceSuite& suite, const Positivity& pos) {
  Trimmer tr{pos};
  const RowPieces r = mr_row(t, suite, tr);
  EifTerms e;
  e.q_s1 = r.q_s1;
  e.q_s2 = r.q_s2;
  e.phi_d = r.phi_d;
  e.q_y1 = pos.bound(suite.m_mu2(t.x1));
  double w1 = 0.0;
  double w2 = 0.0;
  if (t.reached_stage2() && policy.decide1(t.x1) == t.a1) {
    w1 = r.w1;
    const int pi2 = policy.decide2(t.x1, t.a1, *t.x2);
    e.q_y2 = pos.bound(r.mu2[static_cast<std::size_t>(pi2)]);
    if (t.y && pi2 == *t.a2) {
      w2 = r.w2;
      e.q_y3 = *t.y;
    }
  }
  e.phi_n = phi_n_value(e.phi_d, e.q_s1, w1, w2, e.q_y1, e.q_y2, e.q_y3);
  return e;
}

double phi_d(const Trajectory& t, const NuisanceSuite& suite, const Positivity& pos) {
  Trimmer tr{pos};
  const Point x1 = t.x1;
  const double q_s1 = tr(suite.p1(0, x1)) * tr(suite.m_p2(0, 0, x1));
  double phi1_0 = 1.0, phi2_00 = 1.0, q_s2 = 0.0;
  if (gate_stage1_zero(t)) {
    phi1_0 = tr(suite.e1(0, x1)) * tr(suite.c1(0, x1));
    if (t.reached_stage2()) {
      q_s2 = tr(suite.p2(0, 0, x1, *t.x2));
      if (gate_both_zero(t)) {
        phi2_00 = tr(suite.e2(0, 0, x1, *t.x2)) * tr(suite.c2(0, 0, x1, *t.x2));
      }
    }
  }
  return phi_d_value(t, phi1_0, phi2_00, q_s1, q_s2);
}

double phi_n(const Trajectory& t, const LinearPolicy& policy, const NuisanceSuite& suite,
             const Positivity& pos) {
  return eif_terms(t, policy, suite, pos).phi_n;
}

double principal_score_denominator(const Dataset& d, const NuisanceSuite& suite,
                                   const Positivity& pos) {
  CompensatedSum s;
  for (const Trajectory& t : d.rows) {
    s.add(pos.trim(suite.p1(0, t.x1)) * pos.trim(suite.m_p2(0, 0, t.x1)));
  }
  return s.value() / static_cast<double>(d.size());
}

double principal_score(Point x1, const NuisanceSuite& suite, double denominator,
                       const Positivity& pos) {
  if (!(denominator > 0)) throw NonpositiveDenominator(denominator);
  return pos.trim(suite.p1(0, x1)) * pos.trim(suite.m_p2(0, 0, x1)) / denominator;
}

double eif(double phi_n, double phi_d, double v_hat, double d_hat) {
  if (!(d_hat > 0)) throw NonpositiveDenominator(d_hat);
  return (phi_n - v_hat * phi_d) / d_hat;
}

double eif(const Trajectory& t, const LinearPolicy& policy, const NuisanceSuite& suite,
           double v_hat, double d_hat, const Positivity& pos) {
  const EifTerms e = eif_terms(t, policy, suite, pos);
  return eif(e.phi_n, e.phi_d, v_hat, d_hat);
}

Interval eif_variance(std::span<const double> psi, double value) {
  CompensatedSum s;
  for (double p : psi) s.add(p * p);
  const double n = static_cast<double>(psi.size());
  const double upsilon = s.value() / n;
  Interval out;
  out.se = std::sqrt(upsilon / n);
  out.low = value - kZ975 * out.se;
  out.high = value + kZ975 * out.se;
  return out;
}

RowCache build_mr_cache(const Dataset& d, const NuisanceSuite& suite, const Positivity& pos) {
  RowCache c;
  const std::size_t n = d.size();
  c.phi_d.resize(n);
  c.q_s1.resize(n);
  c.w1.resize(n);
  c.w2.resize(n);
  c.mu2.resize(n);
  Trimmer tr{pos};
  for (std::size_t i = 0; i < n; ++i) {
    RowPieces r = mr_row(d.rows[i], suite, tr);
    c.phi_d[i] = r.phi_d;
    c.q_s1[i] = r.q_s1;
    c.w1[i] = r.w1;
    c.w2[i] = r.w2;
    c.mu2[i] = {pos.bound(r.mu2[0]), pos.bound(r.mu2[1])};
  }
  c.trimmed = tr.count;
  return c;
}

void phi_n_rows(const Dataset& d, const RowCache& c, const LinearPolicy& policy,
                std::span<const double> m_mu2, std::vector<double>& out) {
  const std::size_t n = d.size();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory& t = d.rows[i];
    double w1 = 0.0, w2 = 0.0, q_y2 = 0.0, y = 0.0;
    if (c.w1[i] != 0.0 && policy.decide1(t.x1) == t.a1) {
      w1 = c.w1[i];
      const int pi2 = policy.decide2(t.x1, t.a1, *t.x2);
      q_y2 = c.mu2[i][static_cast<std::size_t>(pi2)];
      if (c.w2[i] != 0.0 && pi2 == *t.a2) {
        w2 = c.w2[i];
        y = *t.y;
      }
    }
    out[i] = phi_n_value(c.phi_d[i], c.q_s1[i], w1, w2, m_mu2[i], q_y2, y);
  }
}

EstimateReport ratio_report(const std::string& name, std::span<const double> num,
                            std::span<const double> den) {
  if (num.size() != den.size()) throw DimensionMismatch(num.size(), den.size());
  if (num.empty()) throw EmptyStratum("dataset");
  EstimateReport r;
  r.estimator = name;
  r.n = num.size();
  const double mn = mean(num);
  const double md = mean(den);
  if (!(md > kMinDenominator)) throw NonpositiveDenominator(md);
  r.mean_phi_d = md;
  r.value = mn / md;
  std::vector<double> psi(num.size());
  for (std::size_t i = 0; i < num.size(); ++i) psi[i] = (num[i] - r.value * den[i]) / md;
  r.mean_psi = mean(psi);
  note_mean_psi(r.mean_psi);
  const Interval iv = eif_variance(psi, r.value);
  r.se = iv.se;
  r.ci_low = iv.low;
  r.ci_high = iv.high;
  return r;
}

double max_abs_mean_psi() { return g_max_abs_mean_psi.load(); }

EstimateReport bootstrap_ratio_report(const std::string& name, std::span<const double> num,
                                      std::span<const double> den, int replicates,
                                      std::uint64_t seed) {
  if (num.size() != den.size()) throw DimensionMismatch(num.size(), den.size());
  if (num.empty()) throw EmptyStratum("dataset");
  EstimateReport r;
  r.estimator = name;
  r.n = num.size();
  const double md = mean(den);
  if (!(md > kMinDenominator)) throw NonpositiveDenominator(md);
  r.mean_phi_d = md;
  r.value = mean(num) / md;
  if (replicates < 2) {
    r.se = 0.0;
    r.warnings.push_back("bootstrap disabled: se not computed");
  } else {
    SplitMix64 rng(mix_seed(seed, 0x6b6f6f7473ULL));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(replicates));
    const std::size_t n = num.size();
    for (int b = 0; b < replicates; ++b) {
      CompensatedSum sn, sd;
      for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(rng() % n);
        sn.add(num[i]);
        sd.add(den[i]);
      }
      if (sd.value() > 0) values.push_back(sn.value() / sd.value());
    }
    r.se = values.size() >= 2 ? sample_sd(values) : 0.0;
  }
  r.ci_low = r.value - kZ975 * r.se;
  r.ci_high = r.value + kZ975 * r.se;
  return r;
}

EstimateReport v_mr(const Dataset& d, const LinearPolicy& policy, const NuisanceSuite& suite,
                    const EstimatorOptions& opts) {
  if (d.empty()) throw EmptyStratum("dataset");
  const RowCache c = build_mr_cache(d, suite, opts.positivity);
  std::vector<double> m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m[i] = opts.positivity.bound(suite.m_mu2(d.rows[i].x1));
  std::vector<double> phin;
  phi_n_rows(d, c, policy, m, phin);
  EstimateReport r = ratio_report("mr", phin, c.phi_d);
  r.trimmed = c.trimmed;
  return r;
}

EstimateReport v_q_plugin(const Dataset& d, const LinearPolicy&, const NuisanceSuite& suite,
                          const EstimatorOptions& opts) {
  if (d.empty()) throw EmptyStratum("dataset");
  const Positivity& pos = opts.positivity;
  std::vector<double> num(d.size()), den(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x1 = d.rows[i].x1;
    den[i] = pos.trim(suite.p1(0, x1)) * pos.trim(suite.m_p2(0, 0, x1));
    num[i] = den[i] * pos.bound(suite.m_mu2(x1));
  }
  return bootstrap_ratio_report("q_plugin", num, den, opts.bootstrap, opts.seed);
}

EstimateReport v_ipw(const Dataset& d, const LinearPolicy& policy, const NuisanceSuite& suite,
                     const EstimatorOptions& opts) {
  if (d.empty()) throw EmptyStratum("dataset");
  const RowCache c = build_mr_cache(d, suite, opts.positivity);
  std::vector<double> num(d.size()), den(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Trajectory& t = d.rows[i];
    double w = 0.0;
    if (c.w2[i] != 0.0 && policy.decide1(t.x1) == t.a1 &&
        policy.decide2(t.x1, t.a1, *t.x2) == *t.a2) {
      w = c.w1[i] * c.w2[i];
    }
    num[i] = c.q_s1[i] * w * (w != 0.0 ? *t.y : 0.0);
    den[i] = opts.ipw_form == IpwForm::kRatio ? c.q_s1[i] : c.q_s1[i] * w;
  }
  EstimateReport r = bootstrap_ratio_report("ipw", num, den, opts.bootstrap, opts.seed);
  r.trimmed = c.trimmed;
  return r;
}

// ---------------------------------------------------------------------------
// AIPW

double NuisanceAipwSuite::phi1(int a1, Point x1) const {
  return pos_.trim(s_->e1(a1, x1)) * pos_.trim(s_->c1(a1, x1)) * pos_.trim(s_->p1(a1, x1));
}

double NuisanceAipwSuite::phi2(int a1, int a2, Point x1, Point x2) const {
  return pos_.trim(s_->e2(a1, a2, x1, x2)) * pos_.trim(s_->c2(a1, a2, x1, x2)) *
         pos_.trim(s_->p2(a1, a2, x1, x2));
}

namespace {

std::vector<double> concat(Point a, Point b) {
  std::vector<double> v(a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  return v;
}

const BinaryModel& need(const std::optional<BinaryModel>& m, const char* name) {
  if (!m) throw ArmNotFitted(std::string(name) + " arm not fitted");
  return *m;
}

FeatureMap pick(Spec s, const FeatureMap& correct) {
  switch (s) {
    case Spec::kCorrect: return correct;
    case Spec::kInterceptOnly: return FeatureMap::intercept_only(correct.variables());
    case Spec::kNoInterceptExp: return FeatureMap::exp_no_intercept(correct.variables(), 0);
  }
  return correct;
}

}  // namespace

double FittedAipwSuite::phi1(int a1, Point x1) const {
  const double p = e1_.predict(x1);
  const double e = a1 == 1 ? p : 1.0 - p;
  return pos_.trim(e) * pos_.trim(need(ct1_[a1], "c~1").predict(x1));
}

double FittedAipwSuite::phi2(int a1, int a2, Point x1, Point x2) const {
  const auto x = concat(x1, x2);
  const double p = need(e2_[a1], "e2").predict(x);
  const double e = a2 == 1 ? p : 1.0 - p;
  return pos_.trim(e) * pos_.trim(need(ct2_[arm_index(a1, a2)], "c~2").predict(x));
}

double FittedAipwSuite::q2(int a1, int a2, Point x1, Point x2) const {
  return outcome_->mu2(a1, a2, x1, x2);
}

double FittedAipwSuite::q1(Point x1) const {
  if (!q1_) throw ArmNotFitted("Q1 is not materialized for any policy");
  return (*q1_)(x1);
}

FittedAipwSuite FittedAipwSuite::with_policy(const Dataset& d, const LinearPolicy& policy) const {
  FittedAipwSuite out = *this;
  PolicyOutcomeFitter fitter(d, *outcome_, q1_spec_, q1_basis_, pos_);
  out.q1_ = fitter.fit(policy);
  return out;
}

FittedAipwSuite fit_aipw_suite(const Dataset& d, const ScenarioSpec& spec,
                               const ModelBases& bases,
                               const std::optional<LinearPolicy>& policy,
                               const FitOptions& options) {
  if (d.empty()) throw EmptyStratum("dataset");
  FittedAipwSuite s;
  s.pos_ = options.positivity;
  s.q1_spec_ = spec[NuisanceId::kMMu2];
  s.q1_basis_ = bases.m;
  const LogisticOptions& lo = options.logistic;

  auto fit_rows = [&](const std::vector<std::size_t>& rows, bool stage2, auto label, const std::string& name) {
    if (rows.empty()) throw EmptyStratum(name);
    const int cols = stage2 ? d.p1 + d.p2 : d.p1;
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Trajectory& t = d.rows[rows[i]];
      for (int j = 0; j < d.p1; ++j) pts(static_cast<Eigen::Index>(i), j) = t.x1[static_cast<std::size_t>(j)];
      if (stage2) {
        for (int j = 0; j < d.p2; ++j) {
          pts(static_cast<Eigen::Index>(i), d.p1 + j) = (*t.x2)[static_cast<std::size_t>(j)];
        }
      }
      y(static_cast<Eigen::Index>(i)) = label(t);
    }
    return std::make_pair(pts, y);
  };
  auto rows_where = [&](auto pred) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (pred(d.rows[i])) rows.push_back(i);
    }
    return rows;
  };
  auto binary = [&](const std::vector<std::size_t>& rows, bool stage2, FeatureMap map,
                    auto label, const std::string& name) {
    auto [pts, y] = fit_rows(rows, stage2, label, name);
    return fit_binary_model(std::move(map), pts, y, lo);
  };

  {
    auto rows = rows_where([](const Trajectory&) { return true; });
    s.e1_ = binary(rows, false, pick(spec[NuisanceId::kE1], bases.e1),
                   [](const Trajectory& t) { return t.a1; }, "e1");
  }
  for (int a1 = 0; a1 < 2; ++a1) {
    auto arm = rows_where([a1](const Trajectory& t) { return t.a1 == a1; });
    s.ct1_[a1] = binary(arm, false, pick(spec[NuisanceId::kC1], bases.c1),
                        [](const Trajectory& t) { return t.reached_stage2() ? 1 : 0; },
                        "c~1[a1=" + std::to_string(a1) + "]");
    auto st2 = rows_where([a1](const Trajectory& t) { return t.a1 == a1 && t.reached_stage2(); });
    s.e2_[a1] = binary(st2, true, pick(spec[NuisanceId::kE2], bases.e2),
                       [](const Trajectory& t) { return *t.a2; },
                       "e2[a1=" + std::to_string(a1) + "]");
  }
  std::array<std::optional<MeanModel>, 4> q2;
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) {
      const std::string tag = "[a1=" + std::to_string(a1) + ",a2=" + std::to_string(a2) + "]";
      auto arm = rows_where([a1, a2](const Trajectory& t) {
        return t.a1 == a1 && t.reached_stage2() && *t.a2 == a2;
      });
      s.ct2_[arm_index(a1, a2)] =
          binary(arm, true, pick(spec[NuisanceId::kC2], bases.c2),
                 [](const Trajectory& t) { return t.y.has_value() ? 1 : 0; }, "c~2" + tag);
      auto obs = rows_where([a1, a2](const Trajectory& t) {
        return t.a1 == a1 && t.reached_stage2() && *t.a2 == a2 && t.y.has_value();
      });
      auto [pts, y] = fit_rows(obs, true,
                               [](const Trajectory& t) { return *t.y; }, "Q2" + tag);
      q2[arm_index(a1, a2)] =
          fit_mean(pick(spec[NuisanceId::kMu2], bases.mu2), pts, y, MeanKind::kLeastSquares);
    }
  }
  auto outcome = std::make_shared<FunctionSuite>();
  outcome->f_mu2 = [q2](int a1, int a2, Point x1, Point x2) {
    return q2[arm_index(a1, a2)]->raw(concat(x1, x2));
  };
  s.outcome_ = outcome;
  if (policy) {
    PolicyOutcomeFitter fitter(d, *s.outcome_, s.q1_spec_, s.q1_basis_, s.pos_);
    s.q1_ = fitter.fit(*policy);
  }
  return s;
}

RowCache build_aipw_cache(const Dataset& d, const AipwSuite& suite, const Positivity& pos) {
  RowCache c;
  const std::size_t n = d.size();
  c.phi_d.assign(n, 1.0);
  c.q_s1.assign(n, 1.0);
  c.w1.assign(n, 0.0);
  c.w2.assign(n, 0.0);
  c.mu2.assign(n, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory& t = d.rows[i];
    if (!t.reached_stage2()) continue;
    const Point x1 = t.x1;
    const Point x2 = *t.x2;
    c.w1[i] = 1.0 / suite.phi1(t.a1, x1);
    for (int a2 = 0; a2 < 2; ++a2) {
      c.mu2[i][static_cast<std::size_t>(a2)] = pos.bound(suite.q2(t.a1, a2, x1, x2));
    }
    if (t.y) c.w2[i] = 1.0 / suite.phi2(t.a1, *t.a2, x1, x2);
  }
  return c;
}

EstimateReport v_aipw(const Dataset& d, const LinearPolicy& policy, const AipwSuite& suite,
                      const EstimatorOptions& opts) {
  if (d.empty()) throw EmptyStratum("dataset");
  const RowCache c = build_aipw_cache(d, suite, opts.positivity);
  std::vector<double> q1(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) q1[i] = opts.positivity.bound(suite.q1(d.rows[i].x1));
  std::vector<double> val;
  phi_n_rows(d, c, policy, q1, val);
  return ratio_report("aipw", val, c.phi_d);
}

}  // namespace asv
