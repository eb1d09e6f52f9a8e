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

#include "asv/toy.hpp"

#include <algorithm>
#include <cmath>

#include "asv/error.hpp"

namespace asv {
namespace {

// Rebuilds a (possibly partial) trajectory from x, a, c, s tokens.
KTrajectory from_tokens(const std::vector<int>& tok) {
  KTrajectory t;
  std::size_t i = 0;
  while (i < tok.size()) {
    StageRecord s;
    s.x = {static_cast<double>(tok[i++])};
    if (i < tok.size()) s.a = tok[i++];
    if (i < tok.size()) s.c = tok[i++];
    if (s.c == 0 && i < tok.size()) s.s = tok[i++];
    t.stages.push_back(std::move(s));
  }
  return t;
}

bool starts_with(const std::vector<int>& v, const std::vector<int>& prefix) {
  return v.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), v.begin());
}

std::vector<int> arms_of(const KTrajectory& t, int k) {
  std::vector<int> a;
  for (int j = 0; j < k; ++j) a.push_back(t.stages[static_cast<std::size_t>(j)].a);
  return a;
}

double bernoulli_mass(int v, double p1) { return v == 1 ? p1 : 1.0 - p1; }

class ToyKSuite : public KNuisanceSuite {
 public:
  ToyKSuite(const ToyDgp& dgp, const KPolicy& policy) : dgp_(&dgp), policy_(&policy) {}

  double phi(int k, const KTrajectory& t, std::span<const int> arms) const override {
    const double x1 = t.stages[0].x[0];
    const double xk = t.stages[static_cast<std::size_t>(k - 1)].x[0];
    const int a_prev = k > 1 ? arms[static_cast<std::size_t>(k - 2)] : 0;
    const int ak = arms[static_cast<std::size_t>(k - 1)];
    return bernoulli_mass(ak, dgp_->treat_prob(k, x1, xk, a_prev)) *
           dgp_->uncensored_prob(xk, ak);
  }
  double p(int k, const KTrajectory& t, std::span<const int> arms) const override {
    return dgp_->survival_prob(k, t.stages[0].x[0], arms.first(static_cast<std::size_t>(k)));
  }
  double q_s(int k, const KTrajectory& t) const override {
    std::vector<int> zeros(static_cast<std::size_t>(dgp_->K()), 0);
    double v = 1.0;
    for (int j = k; j <= dgp_->K(); ++j) {
      v *= dgp_->survival_prob(j, t.stages[0].x[0],
                               std::span<const int>(zeros.data(), static_cast<std::size_t>(j)));
    }
    return v;
  }
  double q_y(int k, const KTrajectory& t) const override { return dgp_->q_y(k, t, *policy_); }

 private:
  const ToyDgp* dgp_;
  const KPolicy* policy_;
};

}  // namespace

ToyDgp::ToyDgp(ToyParams p) : p_(p) {
  if (p_.K < 1 || p_.K > 4) throw InvalidValue("toy K must be in 1..4");
  enumerate();
}

double ToyDgp::x_prob(int k, double x1, double x_prev, int a_prev) const {
  if (k == 1) return p_.px1;
  return logistic(p_.g0 + p_.g1 * x1 + p_.g2 * x_prev + p_.g3 * a_prev);
}

double ToyDgp::treat_prob(int, double x1, double xk, int a_prev) const {
  return logistic(p_.al0 + p_.al1 * xk + p_.al2 * x1 + p_.al3 * a_prev);
}

double ToyDgp::uncensored_prob(double xk, int ak) const {
  return logistic(p_.et0 + p_.et1 * xk + p_.et2 * ak);
}

double ToyDgp::survival_prob(int k, double x1, std::span<const int> arms) const {
  double s = 0.0;
  for (int j = 0; j < k; ++j) s += arms[static_cast<std::size_t>(j)];
  return logistic(p_.ga0 + p_.ga1 * x1 + p_.ga2 * s + p_.ga3 * (k - 1));
}

double ToyDgp::outcome_mean(const KTrajectory& t) const {
  const double x1 = t.stages[0].x[0];
  double v = p_.b0 + p_.b1 * x1 + p_.b5 * t.stages[0].a * x1;
  for (std::size_t k = 0; k < t.stages.size(); ++k) {
    if (k > 0) v += p_.b2 * t.stages[k].x[0];
    v += p_.b3 * t.stages[k].a;
  }
  const StageRecord& last = t.stages.back();
  return v + p_.b4 * last.a * last.x[0];
}

void ToyDgp::enumerate() {
  leaves_.clear();
  // Depth-first over stage tokens.
  struct Frame {
    std::vector<int> tok;
    KTrajectory traj;
    double prob;
  };
  std::vector<Frame> stack;
  for (int x1 = 0; x1 < 2; ++x1) {
    Frame f;
    f.tok = {x1};
    f.traj.stages.push_back({{static_cast<double>(x1)}, 0, 0, std::nullopt});
    f.prob = bernoulli_mass(x1, p_.px1);
    stack.push_back(std::move(f));
  }
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const int k = static_cast<int>(f.traj.stages.size());
    const double x1 = f.traj.stages[0].x[0];
    const double xk = f.traj.stages.back().x[0];
    const int a_prev = k > 1 ? f.traj.stages[static_cast<std::size_t>(k - 2)].a : 0;
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) {
        Frame g = f;
        g.tok.push_back(a);
        g.tok.push_back(c);
        g.traj.stages.back().a = a;
        g.traj.stages.back().c = c;
        const double pc = uncensored_prob(xk, a);
        g.prob *= bernoulli_mass(a, treat_prob(k, x1, xk, a_prev)) * (c == 0 ? pc : 1.0 - pc);
        if (c == 1) {
          leaves_.push_back({g.tok, g.traj, g.prob});
          continue;
        }
        const std::vector<int> arms = arms_of(g.traj, k);
        const double ps = survival_prob(k, x1, arms);
        for (int s = 0; s < 2; ++s) {
          Frame h = g;
          h.tok.push_back(s);
          h.traj.stages.back().s = s;
          h.prob *= bernoulli_mass(s, ps);
          if (s == 0) {
            leaves_.push_back({h.tok, h.traj, h.prob});
          } else if (k == p_.K) {
            h.traj.y = outcome_mean(h.traj);
            leaves_.push_back({h.tok, h.traj, h.prob});
          } else {
            const double px = x_prob(k + 1, x1, xk, a);
            for (int x = 0; x < 2; ++x) {
              Frame n = h;
              n.tok.push_back(x);
              n.traj.stages.push_back({{static_cast<double>(x)}, 0, 0, std::nullopt});
              n.prob *= bernoulli_mass(x, px);
              stack.push_back(std::move(n));
            }
          }
        }
      }
    }
  }
}

double ToyDgp::mass(const std::vector<int>& prefix) const {
  CompensatedSum s;
  for (const Leaf& l : leaves_) {
    if (starts_with(l.tokens, prefix)) s.add(l.prob);
  }
  return s.value();
}

double ToyDgp::observed_r(std::vector<int> prefix, int k) const {
  prefix.push_back(0);
  prefix.push_back(0);
  const double den = mass(prefix);
  prefix.push_back(1);
  const double num = mass(prefix);
  const double ps = num / den;
  if (k == p_.K) return ps;
  double next = 0.0;
  for (int x = 0; x < 2; ++x) {
    std::vector<int> q = prefix;
    q.push_back(x);
    next += mass(q) / num * observed_r(q, k + 1);
  }
  return ps * next;
}

double ToyDgp::observed_q_y(std::vector<int> prefix, int k, const KPolicy& policy) const {
  const int a = policy.decide(k, from_tokens(prefix));
  prefix.push_back(a);
  prefix.push_back(0);
  prefix.push_back(1);
  const double den = mass(prefix);
  if (k == p_.K) {
    CompensatedSum s;
    for (const Leaf& l : leaves_) {
      if (starts_with(l.tokens, prefix)) s.add(l.prob * *l.traj.y);
    }
    return s.value() / den;
  }
  double v = 0.0;
  for (int x = 0; x < 2; ++x) {
    std::vector<int> q = prefix;
    q.push_back(x);
    v += mass(q) / den * observed_q_y(q, k + 1, policy);
  }
  return v;
}

double ToyDgp::latent_stratum_prob(double x1) const {
  double v = 1.0;
  for (int k = 1; k <= p_.K; ++k) {
    double lo = 1.0;
    std::vector<int> arms(static_cast<std::size_t>(k));
    for (int code = 0; code < (1 << k); ++code) {
      for (int j = 0; j < k; ++j) arms[static_cast<std::size_t>(j)] = (code >> j) & 1;
      lo = std::min(lo, survival_prob(k, x1, arms));
    }
    v *= lo;
  }
  return v;
}

double ToyDgp::observed_stratum_prob(double x1) const {
  return observed_r({static_cast<int>(x1)}, 1);
}

double ToyDgp::always_survivor_value(const KPolicy& policy) const {
  // E[Y^pi | x1] over the potential covariate path.
  auto potential = [&](double x1) {
    struct Node {
      KTrajectory t;
      double prob;
    };
    std::vector<Node> stack;
    KTrajectory root;
    root.stages.push_back({{x1}, 0, 0, 1});
    stack.push_back({root, 1.0});
    CompensatedSum acc;
    while (!stack.empty()) {
      Node n = std::move(stack.back());
      stack.pop_back();
      const int k = static_cast<int>(n.t.stages.size());
      n.t.stages.back().a = policy.decide(k, n.t);
      if (k == p_.K) {
        acc.add(n.prob * outcome_mean(n.t));
        continue;
      }
      const double px = x_prob(k + 1, x1, n.t.stages.back().x[0], n.t.stages.back().a);
      for (int x = 0; x < 2; ++x) {
        Node m = n;
        m.t.stages.push_back({{static_cast<double>(x)}, 0, 0, 1});
        m.prob *= bernoulli_mass(x, px);
        stack.push_back(std::move(m));
      }
    }
    return acc.value();
  };
  double num = 0.0, den = 0.0;
  for (int x1 = 0; x1 < 2; ++x1) {
    const double w = bernoulli_mass(x1, p_.px1) * latent_stratum_prob(x1);
    num += w * potential(x1);
    den += w;
  }
  return num / den;
}

double ToyDgp::identified_value(const KPolicy& policy) const {
  double num = 0.0, den = 0.0;
  for (int x1 = 0; x1 < 2; ++x1) {
    const double w = mass({x1}) * observed_stratum_prob(x1);
    num += w * observed_q_y({x1}, 1, policy);
    den += w;
  }
  return num / den;
}

double ToyDgp::q_y(int k, const KTrajectory& t, const KPolicy& policy) const {
  KTrajectory h;
  for (int j = 0; j < k; ++j) h.stages.push_back(t.stages[static_cast<std::size_t>(j)]);
  h.stages.back().a = policy.decide(k, h);
  h.stages.back().c = 0;
  h.stages.back().s = 1;
  if (k == p_.K) return outcome_mean(h);
  const double x1 = h.stages[0].x[0];
  const double px = x_prob(k + 1, x1, h.stages.back().x[0], h.stages.back().a);
  double v = 0.0;
  for (int x = 0; x < 2; ++x) {
    KTrajectory n = h;
    n.stages.push_back({{static_cast<double>(x)}, 0, 0, std::nullopt});
    v += bernoulli_mass(x, px) * q_y(k + 1, n, policy);
  }
  return v;
}

std::pair<double, double> ToyDgp::expected_phi(const KPolicy& policy,
                                               const KNuisanceSuite& suite) const {
  CompensatedSum n, d;
  for (const Leaf& l : leaves_) {
    const double pd = phi_d_k(l.traj, suite, p_.K);
    const double pn = phi_n_k(l.traj, policy, suite, p_.K, pd);
    n.add(l.prob * pn);
    d.add(l.prob * pd);
  }
  return {n.value(), d.value()};
}

ToyDgp::McValue ToyDgp::plugin_oracle(const KPolicy& policy, std::size_t m,
                                      std::uint64_t seed) const {
  if (m < 2) throw InvalidValue("plugin oracle needs at least two draws");
  // Per-x1 pieces are exact; only the X1 draws are random.
  std::array<double, 2> prod{}, qy{};
  for (int x1 = 0; x1 < 2; ++x1) {
    KTrajectory t;
    t.stages.push_back({{static_cast<double>(x1)}, 0, 0, std::nullopt});
    prod[static_cast<std::size_t>(x1)] = ToyKSuite(*this, policy).q_s(1, t);
    qy[static_cast<std::size_t>(x1)] = q_y(1, t, policy);
  }
  SplitMix64 rng(mix_seed(seed, 0x746f79ULL));
  std::vector<double> num(m), den(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t x1 = rng.uniform() < p_.px1 ? 1 : 0;
    den[i] = prod[x1];
    num[i] = prod[x1] * qy[x1];
  }
  const double md = mean(den);
  McValue out;
  out.value = mean(num) / md;
  CompensatedSum s;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = (num[i] - out.value * den[i]) / md;
    s.add(r * r);
  }
  out.se = std::sqrt(s.value() / static_cast<double>(m) / static_cast<double>(m));
  return out;
}

KDataset ToyDgp::sample(std::size_t n, std::uint64_t seed) const {
  KDataset d;
  d.K = p_.K;
  d.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng(mix_seed(seed, i));
    KTrajectory& t = d.rows[i];
    t.id = i;
    double x1 = 0.0;
    for (int k = 1; k <= p_.K; ++k) {
      const double x_prev = k > 1 ? t.stages.back().x[0] : 0.0;
      const int a_prev = k > 1 ? t.stages.back().a : 0;
      const double xk = rng.uniform() < x_prob(k, x1, x_prev, a_prev) ? 1.0 : 0.0;
      if (k == 1) x1 = xk;
      StageRecord s;
      s.x = {xk};
      s.a = rng.uniform() < treat_prob(k, x1, xk, a_prev) ? 1 : 0;
      s.c = rng.uniform() < uncensored_prob(xk, s.a) ? 0 : 1;
      t.stages.push_back(s);
      if (s.c == 1) break;
      const std::vector<int> arms = arms_of(t, k);
      const int alive = rng.uniform() < survival_prob(k, x1, arms) ? 1 : 0;
      t.stages.back().s = alive;
      if (alive == 0) break;
      if (k == p_.K) {
        const double u = rng.uniform() + 0x1.0p-54;
        t.y = outcome_mean(t) + p_.sd * normal_quantile(u);
      }
    }
  }
  return d;
}

Dataset ToyDgp::sample_two_stage(std::size_t n, std::uint64_t seed) const {
  if (p_.K != 2) throw InvalidValue("two-stage sampling needs K = 2");
  const KDataset k = sample(n, seed);
  Dataset d;
  d.p1 = 1;
  d.p2 = 1;
  d.rows.reserve(n);
  for (const KTrajectory& t : k.rows) {
    Trajectory r;
    r.id = t.id;
    r.x1 = t.stages[0].x;
    r.a1 = t.stages[0].a;
    r.c1 = t.stages[0].c;
    r.s1 = t.stages[0].s;
    if (t.stages.size() > 1) {
      r.x2 = t.stages[1].x;
      r.a2 = t.stages[1].a;
      r.c2 = t.stages[1].c;
      r.s2 = t.stages[1].s;
    }
    r.y = t.y;
    d.rows.push_back(std::move(r));
  }
  return d;
}

std::unique_ptr<KNuisanceSuite> ToyDgp::true_suite(const KPolicy& policy) const {
  return std::make_unique<ToyKSuite>(*this, policy);
}

FunctionSuite ToyDgp::true_two_stage_suite(const LinearPolicy& policy) const {
  if (p_.K != 2) throw InvalidValue("two-stage suite needs K = 2");
  auto self = std::make_shared<const ToyDgp>(*this);
  auto stage1 = [](Point x1, int a1) {
    KTrajectory t;
    t.stages.push_back({{x1[0]}, a1, 0, 1});
    return t;
  };
  auto stage2 = [](Point x1, int a1, Point x2, int a2) {
    KTrajectory t;
    t.stages.push_back({{x1[0]}, a1, 0, 1});
    t.stages.push_back({{x2[0]}, a2, 0, 1});
    return t;
  };
  FunctionSuite s;
  s.f_e1 = [self](int a1, Point x1) {
    return bernoulli_mass(a1, self->treat_prob(1, x1[0], x1[0], 0));
  };
  s.f_c1 = [self](int a1, Point x1) { return self->uncensored_prob(x1[0], a1); };
  s.f_p1 = [self](int a1, Point x1) {
    const int arms[1] = {a1};
    return self->survival_prob(1, x1[0], arms);
  };
  s.f_e2 = [self](int a1, int a2, Point x1, Point x2) {
    return bernoulli_mass(a2, self->treat_prob(2, x1[0], x2[0], a1));
  };
  s.f_c2 = [self](int, int a2, Point, Point x2) { return self->uncensored_prob(x2[0], a2); };
  s.f_p2 = [self](int a1, int a2, Point x1, Point) {
    const int arms[2] = {a1, a2};
    return self->survival_prob(2, x1[0], arms);
  };
  s.f_mu2 = [self, stage2](int a1, int a2, Point x1, Point x2) {
    return self->outcome_mean(stage2(x1, a1, x2, a2));
  };
  s.f_m_p2 = [self](int a1, int a2, Point x1) {
    const int arms[2] = {a1, a2};
    return self->survival_prob(2, x1[0], arms);
  };
  auto pol = std::make_shared<TwoStageKPolicy>(policy);
  s.f_m_mu2 = [self, pol, stage1](Point x1) { return self->q_y(1, stage1(x1, 0), *pol); };
  return s;
}

}  // namespace asv
