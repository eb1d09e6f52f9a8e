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

// Acceptance suite: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asv/cli.hpp"
#include "asv/config.hpp"
#include "asv/crossfit.hpp"
#include "asv/estimators.hpp"
#include "asv/experiment.hpp"
#include "asv/general_k.hpp"
#include "asv/learning.hpp"
#include "asv/numeric.hpp"
#include "asv/sensitivity.hpp"
#include "asv/simulation.hpp"
#include "asv/toy.hpp"
#include "test_util.hpp"

namespace asv {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const int kThreads = default_threads();

Positivity untrimmed() {
  Positivity p;
  p.eps = 0.0;
  return p;
}

Outcome reduction_identity() {
  EstimatorOptions opts;
  opts.positivity = untrimmed();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FunctionSuite s = testing::unit_survival_suite(seed);
    const LinearPolicy pi = testing::fuzz_policy(seed);
    const Dataset d = testing::fuzz_dataset(500, seed, {.fully_observed = true});
    const double mr = v_mr(d, pi, s, opts).value;
    const double aipw = v_aipw(d, pi, NuisanceAipwSuite(s, opts.positivity), opts).value;
    worst = std::max(worst, std::fabs(mr - aipw));
  }
  return {worst <= 1e-10, fmt("max |v_mr - v_aipw| = %.3e over 50 datasets", worst)};
}

Outcome phi_d_shortcut() {
  std::size_t checked = 0, mismatched = 0;
  for (std::uint64_t seed = 0; checked < 10000; ++seed) {
    const FunctionSuite s = testing::fuzz_suite(seed);
    const Dataset d = testing::fuzz_dataset(1000, seed);
    const Positivity pos;
    for (const Trajectory& t : d.rows) {
      if (t.a1 != 1 || checked == 10000) continue;
      ++checked;
      const double q_s1 = pos.trim(s.p1(0, t.x1)) * pos.trim(s.m_p2(0, 0, t.x1));
      if (phi_d(t, s, pos) != q_s1) ++mismatched;
    }
  }
  return {mismatched == 0, fmt("%zu of %zu treated trajectories differ", mismatched, checked)};
}

Outcome toy_oracle() {
  const ToyDgp toy(ToyParams{});
  const LinearPolicy pi({0.2, -1.0}, {-0.1, 0.5, 1.0, -0.6});
  const TwoStageKPolicy kpi(pi);
  const double latent = toy.always_survivor_value(kpi);
  const double identified = toy.identified_value(kpi);
  const double gap = std::fabs(latent - identified);
  const FunctionSuite truth = toy.true_two_stage_suite(pi);
  EstimatorOptions opts;
  opts.positivity = untrimmed();
  const EstimateReport r = v_mr(toy.sample_two_stage(100000, 41), pi, truth, opts);
  const double z = std::fabs(r.value - latent) / r.se;
  return {gap <= 1e-12 && z <= 3.0,
          fmt("|latent - identified| = %.2e; v_mr %.5f vs %.5f (%.2f SE)", gap, r.value, latent,
              z)};
}

Outcome sensitivity_null() {
  const Dataset d = simulate(SimConfig::preset_config("dgp1"), 5000, 51);
  const LinearPolicy pi = default_evaluation_policy();
  const FittedSuite s = fit_suite(d, ScenarioSpec::preset("M1"), pi);
  EstimatorOptions opts;
  opts.bootstrap = 50;
  const double base = v_q_plugin(d, pi, s, opts).value;
  const double sens = v_sensitivity(d, pi, s, SensitivityParams::constant(1.0), opts).value;
  const double gap = std::fabs(sens - base);
  bool unit = true;
  SplitMix64 rng(52);
  const SensitivityParams one = SensitivityParams::constant(1.0, 0.0);
  for (int i = 0; i < 100000; ++i) {
    const double m[4] = {0.01 + 0.98 * rng.uniform(), 0.01 + 0.98 * rng.uniform(),
                         0.01 + 0.98 * rng.uniform(), 0.01 + 0.98 * rng.uniform()};
    for (const SensitivityParams& p : {SensitivityParams::constant(1.0), one}) {
      const OmegaWeights w = omega_from_m(m[0], m[1], m[2], m[3], p);
      unit = unit && w.w01 == 1.0 && w.w10 == 1.0;
    }
  }
  return {gap <= 1e-10 && unit,
          fmt("|v_sens - v_q_plugin| = %.2e; omega01 = omega10 = 1 on 1e5 draws: %s", gap,
              unit ? "yes" : "no")};
}

Outcome general_k() {
  double worst = 0.0;
  const Positivity pos;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const FunctionSuite s = testing::fuzz_suite(seed);
    const LinearPolicy pi = testing::fuzz_policy(seed);
    const Dataset d = testing::fuzz_dataset(1000, seed);
    EstimatorOptions opts;
    opts.positivity = pos;
    const double two = v_mr(d, pi, s, opts).value;
    const double k =
        v_mr_general_k(to_k_dataset(d), TwoStageKPolicy(pi), TwoStageKSuite(s, pi, pos)).value;
    worst = std::max(worst, std::fabs(two - k) / std::max(1.0, std::fabs(two)));
  }
  ToyParams p;
  p.K = 3;
  const ToyDgp toy(p);
  const KLinearPolicy pi(
      {{0.2, -1.0}, {-0.1, 0.5, 1.0, -0.6}, {0.3, -0.4, 0.2, 1.0, 0.5, -0.7}});
  const auto truth = toy.true_suite(pi);
  const EstimateReport r = v_mr_general_k(toy.sample(100000, 61), pi, *truth);
  const ToyDgp::McValue oracle = toy.plugin_oracle(pi, 1000000, 62);
  const double se = std::hypot(r.se, oracle.se);
  const double z = std::fabs(r.value - oracle.value) / se;
  return {worst <= 1e-12 && z <= 3.0,
          fmt("K=2 max rel gap %.2e; K=3 %.5f vs oracle %.5f (%.2f SE)", worst, r.value,
              oracle.value, z)};
}

std::string run_text(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return std::to_string(code) + out.str();
}

Outcome determinism() {
  const SimConfig cfg = SimConfig::preset_config("dgp2");
  bool same = simulate(cfg, 20000, 71) == simulate(cfg, 20000, 71);

  const std::string data = testing::temp_path("det.csv");
  write_csv(simulate(SimConfig::preset_config("dgp1"), 2000, 72), data);
  const std::string policy = testing::temp_path("det_policy.json");
  default_evaluation_policy().write(policy);
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"evaluate", "--data", data, "--policy", policy, "--estimator",
                                 "ipw", "--seed", "5"},
        {"crossfit", "--data", data, "--policy", policy, "--folds", "3", "--seed", "5"},
        {"learn", "--data", data, "--max-gen", "10", "--de-seed", "5"},
        {"sensitivity", "--data", data, "--policy", policy, "--bootstrap", "20", "--out",
         testing::temp_path("det_grid.csv")}}) {
    const std::string a = run_text(args);
    same = same && a == run_text(args) && a.front() == '0';
  }

  OpeOptions o;
  o.scenarios = {"M1", "M6"};
  o.n_list = {1000};
  o.reps = 4;
  o.policy = default_evaluation_policy();
  o.estimators = {"mr", "aipw"};
  o.truth_m = 2000;
  o.truth_inner = 50;
  o.seed = 73;
  auto flat = [](const ExperimentResult& r) {
    std::vector<double> v;
    for (const ReplicationRecord& rec : r.records) v.push_back(rec.value);
    return v;
  };
  const ExperimentResult a = run_ope_experiment(o);
  o.threads = 2;
  same = same && flat(a) == flat(run_ope_experiment(o));
  return {same, same ? "simulate, CLI outputs and experiments identical across runs"
                     : "outputs differ between identical runs"};
}

const ReplicationSummary* find(const std::vector<ReplicationSummary>& s, const std::string& est,
                               const std::string& scenario) {
  for (const ReplicationSummary& x : s) {
    if (x.estimator == est && x.scenario == scenario) return &x;
  }
  return nullptr;
}

Outcome multiple_robustness() {
  OpeOptions o;
  o.config = SimConfig::preset_config("dgp1");
  o.n_list = {5000};
  o.reps = 200;
  o.policy = default_evaluation_policy();
  o.seed = 81;
  o.threads = kThreads;
  const ExperimentResult r = run_ope_experiment(o);
  bool pass = true;
  std::string detail = fmt("truth %.4f;", r.truth);
  for (const std::string& m : o.scenarios) {
    const ReplicationSummary* s = find(r.summaries, "mr", m);
    const bool ok = s && s->failures == 0 &&
                    (m == "M6" ? s->bias <= -0.9 : std::fabs(s->bias) <= 0.30);
    pass = pass && ok;
    detail += fmt(" %s bias %+.3f sd %.3f%s;", m.c_str(), s ? s->bias : NAN,
                  s && s->se ? *s->se : NAN, s && s->failures ? " (failures)" : "");
  }
  return {pass, detail};
}

// Shared M1, n = 2000 run for coverage and efficiency.
const ExperimentResult& m1_run() {
  static const ExperimentResult r = [] {
    OpeOptions o;
    o.config = SimConfig::preset_config("dgp1");
    o.scenarios = {"M1"};
    o.n_list = {2000};
    o.reps = 500;
    o.policy = default_evaluation_policy();
    o.estimators = {"mr", "q_plugin", "ipw"};
    o.seed = 91;
    o.threads = kThreads;
    return run_ope_experiment(o);
  }();
  return r;
}

Outcome coverage() {
  const ReplicationSummary* s = find(m1_run().summaries, "mr", "M1");
  const double c = s ? s->coverage : NAN;
  return {s && s->failures == 0 && c >= 0.91 && c <= 0.98,
          fmt("coverage %.3f over %d reps (bias %+.3f)", c, s ? s->reps : 0, s ? s->bias : NAN)};
}

Outcome efficiency() {
  auto sd = [](const std::string& est) {
    std::vector<double> v;
    for (const ReplicationRecord& r : m1_run().records) {
      if (r.estimator == est && r.rep < 200 && !r.failed) v.push_back(r.value);
    }
    return v.size() == 200 ? sample_sd(v) : NAN;
  };
  const double q = sd("q_plugin"), mr = sd("mr"), ipw = sd("ipw");
  return {q < mr && mr < ipw && ipw / mr >= 2.0,
          fmt("SD q_plugin %.3f, mr %.3f, ipw %.3f (ratio %.2f)", q, mr, ipw, ipw / mr)};
}

Outcome learning_quality() {
  OplOptions o;
  o.config = SimConfig::preset_config("dgp1");
  o.n_list = {2000};
  o.reps = 100;
  o.seed = 101;
  o.threads = kThreads;
  const OplResult r = run_opl_experiment(o);
  const ReplicationSummary* mr = find(r.summaries, "mr", "M1");
  const ReplicationSummary* aipw = find(r.summaries, "aipw", "M1");
  if (!mr || !aipw || !mr->pcd_mean || !aipw->pcd_mean) return {false, "missing summaries"};
  const bool pcd = *mr->pcd_mean >= 0.98 && *mr->pcd_mean >= *aipw->pcd_mean;
  auto in = [](double c) { return c >= 0.90 && c <= 0.99; };
  const bool cov = in(mr->coverage) && in(aipw->coverage);
  return {pcd && cov && mr->failures == 0 && aipw->failures == 0,
          fmt("V* %.4f; PCD-AS mr %.4f aipw %.4f; coverage mr %.2f aipw %.2f", r.optimal_value,
              *mr->pcd_mean, *aipw->pcd_mean, mr->coverage, aipw->coverage)};
}

Outcome marginals() {
  struct Target {
    const char* preset;
    double censor1, censor2, survive1, survive2;
  };
  const Target targets[] = {{"dgp1", 0.04, 0.08, 0.84, 0.65}, {"dgp2", 0.07, 0.13, 0.85, 0.70}};
  bool pass = true;
  std::string detail;
  for (const Target& t : targets) {
    const MarginalRates r = marginal_rates(simulate(SimConfig::preset_config(t.preset), 1000000, 111));
    const double got[4] = {r.censor1, r.censor2, r.survive1, r.survive2};
    const double want[4] = {t.censor1, t.censor2, t.survive1, t.survive2};
    bool ok = true;
    for (int i = 0; i < 4; ++i) ok = ok && std::fabs(got[i] - want[i]) <= 0.015;
    pass = pass && ok;
    detail += fmt("%s censoring %.1f%%/%.1f%% survival %.1f%%/%.1f%% (%s); ", t.preset,
                  100 * got[0], 100 * got[1], 100 * got[2], 100 * got[3], ok ? "ok" : "off");
  }
  return {pass, detail};
}

Outcome mean_zero_eif() {
  const double m = max_abs_mean_psi();
  return {m <= 1e-10, fmt("max |mean psi| over all ratio estimates = %.2e", m)};
}

}  // namespace
}  // namespace asv

int main(int argc, char** argv) {
  using asv::Outcome;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, asv::reduction_identity}, {3, asv::phi_d_shortcut},
      {4, asv::toy_oracle},         {5, asv::sensitivity_null},
      {6, asv::general_k},          {7, asv::determinism},
      {8, asv::multiple_robustness}, {9, asv::coverage},
      {10, asv::efficiency},        {11, asv::learning_quality},
      {12, asv::marginals},         {2, asv::mean_zero_eif},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  std::vector<std::pair<int, std::string>> lines;
  for (const auto& [id, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    const std::string line = asv::fmt("criterion %2d: %s  %s [%.1fs]", id, o.pass ? "PASS" : "FAIL",
                                      o.detail.c_str(), secs);
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    lines.emplace_back(id, line);
  }
  std::sort(lines.begin(), lines.end());
  std::printf("---- summary ----\n");
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria failed\n", failed, lines.size());
  return failed == 0 ? 0 : 1;
}
