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

#include "asv/general_k.hpp"

#include "asv/error.hpp"

namespace asv {
namespace {

std::vector<int> observed_arms(const KTrajectory& t, int k) {
  std::vector<int> a(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) a[static_cast<std::size_t>(j)] = t.stages[static_cast<std::size_t>(j)].a;
  return a;
}

}  // namespace

void validate(const KTrajectory& t, int K) {
  const int m = static_cast<int>(t.stages.size());
  if (m < 1 || m > K) throw MonotoneViolation("stages");
  for (int j = 0; j < m; ++j) {
    const StageRecord& s = t.stages[static_cast<std::size_t>(j)];
    if (s.x.empty()) throw InvalidValue("stage covariates must be non-empty");
    const bool last = j == m - 1;
    if (s.c == 1) {
      if (s.s) throw MonotoneViolation("s" + std::to_string(j + 1));
      if (!last) throw MonotoneViolation("x" + std::to_string(j + 2));
      continue;
    }
    if (!s.s) throw MonotoneViolation("s" + std::to_string(j + 1));
    if (!last && *s.s == 0) throw MonotoneViolation("x" + std::to_string(j + 2));
    if (last && *s.s == 1 && m < K) throw MonotoneViolation("x" + std::to_string(j + 2));
  }
  const StageRecord& last = t.stages.back();
  const bool outcome_due = m == K && last.c == 0 && *last.s == 1;
  if (outcome_due && !t.y) throw MonotoneViolation("y");
  if (!outcome_due && t.y) throw MonotoneViolation("y");
}

KTrajectory to_k_trajectory(const Trajectory& t) {
  KTrajectory k;
  k.id = t.id;
  k.stages.push_back({t.x1, t.a1, t.c1, t.s1});
  if (t.reached_stage2()) k.stages.push_back({*t.x2, *t.a2, *t.c2, t.s2});
  k.y = t.y;
  return k;
}

KDataset to_k_dataset(const Dataset& d) {
  KDataset k;
  k.K = 2;
  k.rows.reserve(d.size());
  for (const Trajectory& t : d.rows) k.rows.push_back(to_k_trajectory(t));
  return k;
}

int TwoStageKPolicy::decide(int k, const KTrajectory& t) const {
  if (k == 1) return p_.decide1(t.stages[0].x);
  return p_.decide2(t.stages[0].x, t.stages[0].a, t.stages[1].x);
}

int KLinearPolicy::decide(int k, const KTrajectory& t) const {
  std::vector<double> h;
  for (int j = 0; j < k; ++j) {
    const auto& x = t.stages[static_cast<std::size_t>(j)].x;
    h.insert(h.end(), x.begin(), x.end());
  }
  for (int j = 0; j + 1 < k; ++j) h.push_back(t.stages[static_cast<std::size_t>(j)].a);
  const auto& beta = betas_.at(static_cast<std::size_t>(k - 1));
  if (beta.size() != h.size() + 1) throw DimensionMismatch(beta.size() - 1, h.size());
  double s = beta[0];
  for (std::size_t j = 0; j < h.size(); ++j) s += beta[j + 1] * h[j];
  return s > 0 ? 1 : 0;
}

double TwoStageKSuite::phi(int k, const KTrajectory& t, std::span<const int> arms) const {
  const Point x1 = t.stages[0].x;
  if (k == 1) return pos_.trim(s_->e1(arms[0], x1)) * pos_.trim(s_->c1(arms[0], x1));
  const Point x2 = t.stages[1].x;
  return pos_.trim(s_->e2(arms[0], arms[1], x1, x2)) * pos_.trim(s_->c2(arms[0], arms[1], x1, x2));
}

double TwoStageKSuite::p(int k, const KTrajectory& t, std::span<const int> arms) const {
  const Point x1 = t.stages[0].x;
  if (k == 1) return pos_.trim(s_->p1(arms[0], x1));
  return pos_.trim(s_->p2(arms[0], arms[1], x1, t.stages[1].x));
}

double TwoStageKSuite::q_s(int k, const KTrajectory& t) const {
  const Point x1 = t.stages[0].x;
  if (k == 1) return pos_.trim(s_->p1(0, x1)) * pos_.trim(s_->m_p2(0, 0, x1));
  return pos_.trim(s_->p2(0, 0, x1, t.stages[1].x));
}

double TwoStageKSuite::q_y(int k, const KTrajectory& t) const {
  const Point x1 = t.stages[0].x;
  if (k == 1) return pos_.bound(s_->m_mu2(x1));
  const int a1 = policy_.decide1(x1);
  const Point x2 = t.stages[1].x;
  const int a2 = policy_.decide2(x1, a1, x2);
  return pos_.bound(s_->mu2(a1, a2, x1, x2));
}

double phi_d_k(const KTrajectory& t, const KNuisanceSuite& suite, int K) {
  const int m = static_cast<int>(t.stages.size());
  std::vector<int> zeros(static_cast<std::size_t>(K), 0);
  // W^0_{k-1} and the prefix of survivals.
  double w_prev = 1.0;
  double value = 0.0;
  for (int k = 1; k <= K; ++k) {
    if (w_prev == 0.0 || k > m) break;
    const StageRecord& s = t.stages[static_cast<std::size_t>(k - 1)];
    const double q = suite.q_s(k, t);
    double w = 0.0;
    if (s.a == 0 && s.c == 0) {
      w = w_prev / suite.phi(k, t, std::span<const int>(zeros.data(), static_cast<std::size_t>(k)));
    }
    value += (w_prev - w) * q;
    if (w != 0.0 && *s.s == 0) {
      w_prev = 0.0;
      break;
    }
    w_prev = w;
  }
  // Leading term: all stages untreated, uncensored, survived.
  if (w_prev != 0.0 && m == K && t.y) value += w_prev;
  return value;
}

double phi_n_k(const KTrajectory& t, const KPolicy& policy, const KNuisanceSuite& suite,
               int K, double phi_d) {
  const double q_s1 = suite.q_s(1, t);
  const double q_y1 = suite.q_y(1, t);
  double value = q_y1 * phi_d;
  double w = 1.0;
  double q_prev = q_y1;
  double aug = 0.0;
  const int m = static_cast<int>(t.stages.size());
  for (int k = 1; k <= K && k <= m; ++k) {
    const StageRecord& s = t.stages[static_cast<std::size_t>(k - 1)];
    if (s.c == 1 || *s.s == 0 || policy.decide(k, t) != s.a) break;
    const std::vector<int> arms = observed_arms(t, k);
    w /= suite.phi(k, t, arms) * suite.p(k, t, arms);
    const double q_next = k < K ? suite.q_y(k + 1, t) : *t.y;
    aug += w * (q_next - q_prev);
    q_prev = q_next;
  }
  return value + aug * q_s1;
}

EstimateReport v_mr_general_k(const KDataset& d, const KPolicy& policy,
                              const KNuisanceSuite& suite) {
  if (d.rows.empty()) throw EmptyStratum("dataset");
  std::vector<double> pd(d.size()), pn(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    pd[i] = phi_d_k(d.rows[i], suite, d.K);
    pn[i] = phi_n_k(d.rows[i], policy, suite, d.K, pd[i]);
  }
  EstimateReport r = ratio_report("mr_k", pn, pd);
  return r;
}

}  // namespace asv
