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

#include "asv/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "asv/error.hpp"
#include "json.hpp"

namespace asv {
namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

EstimateReport run_estimator(const std::string& name, const Dataset& d,
                             const LinearPolicy& policy, const ScenarioSpec& spec,
                             const ModelBases& bases, const FittedSuite& suite,
                             const OpeOptions& o) {
  EstimatorOptions eo;
  eo.positivity = o.fit.positivity;
  eo.bootstrap = o.bootstrap;
  if (name == "mr") return v_mr(d, policy, suite, eo);
  if (name == "q_plugin") return v_q_plugin(d, policy, suite, eo);
  if (name == "ipw") return v_ipw(d, policy, suite, eo);
  if (name == "aipw") {
    const FittedAipwSuite a = fit_aipw_suite(d, spec, bases, policy, o.fit);
    return v_aipw(d, policy, a, eo);
  }
  throw ConfigError("unknown estimator '" + name + "'");
}

}  // namespace

std::string ReplicationSummary::to_json() const {
  nlohmann::ordered_json j;
  j["estimator"] = estimator;
  j["scenario"] = scenario;
  j["n"] = n;
  j["reps"] = reps;
  j["failures"] = failures;
  j["truth"] = truth;
  j["mean"] = optional_number(mean);
  j["bias"] = optional_number(bias);
  j["se"] = optional_number(se);
  j["coverage"] = optional_number(coverage);
  j["pcd_as_mean"] = optional_number(pcd_mean);
  j["pcd_as_sd"] = optional_number(pcd_sd);
  j["mean_true_value"] = optional_number(mean_true_value);
  return j.dump(2);
}

std::vector<ReplicationSummary> summarize(const std::vector<ReplicationRecord>& records,
                                          double truth) {
  std::vector<ReplicationSummary> out;
  std::map<std::tuple<std::string, std::string, std::size_t>, std::size_t> index;
  for (const ReplicationRecord& r : records) {
    const auto key = std::make_tuple(r.estimator, r.scenario, r.n);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      ReplicationSummary s;
      s.estimator = r.estimator;
      s.scenario = r.scenario;
      s.n = r.n;
      s.truth = truth;
      out.push_back(std::move(s));
    }
    ReplicationSummary& s = out[it->second];
    ++s.reps;
    if (r.failed) {
      ++s.failures;
      continue;
    }
    s.values.push_back(r.value);
  }
  for (ReplicationSummary& s : out) {
    std::vector<double> pcd, tv;
    std::size_t covered = 0;
    for (const ReplicationRecord& r : records) {
      if (r.failed || r.estimator != s.estimator || r.scenario != s.scenario || r.n != s.n) continue;
      if (r.covered) ++covered;
      if (std::isfinite(r.pcd_as)) pcd.push_back(r.pcd_as);
      if (std::isfinite(r.true_value)) tv.push_back(r.true_value);
    }
    if (s.values.empty()) {
      s.mean = s.bias = s.coverage = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    s.mean = asv::mean(s.values);
    s.bias = s.mean - truth;
    if (s.values.size() >= 2) s.se = sample_sd(s.values);
    s.coverage = static_cast<double>(covered) / static_cast<double>(s.values.size());
    if (!pcd.empty()) {
      s.pcd_mean = asv::mean(pcd);
      if (pcd.size() >= 2) s.pcd_sd = sample_sd(pcd);
    }
    if (!tv.empty()) s.mean_true_value = asv::mean(tv);
  }
  return out;
}

ExperimentResult run_ope_experiment(const OpeOptions& o) {
  if (o.reps < 1) throw ConfigError("reps must be >= 1");
  std::vector<ScenarioSpec> specs;
  for (const std::string& s : o.scenarios) specs.push_back(ScenarioSpec::preset(s));
  const ModelBases bases = correct_bases(o.config);
  ExperimentResult result;
  result.truth =
      true_value(o.policy, o.config, o.truth_m, mix_seed(o.seed, 0x7472757468ULL), o.truth_inner,
                 o.threads)
          .value;

  const std::size_t S = specs.size(), E = o.estimators.size();
  const auto R = static_cast<std::size_t>(o.reps);
  const std::size_t tasks = o.n_list.size() * R;
  result.records.resize(tasks * S * E);
  parallel_for(tasks, o.threads, [&](std::size_t task) {
    const std::size_t ni = task / R;
    const int rep = static_cast<int>(task % R);
    const std::size_t n = o.n_list[ni];
    const Dataset d = simulate(o.config, n, mix_seed(o.seed, n, static_cast<std::uint64_t>(rep)));
    for (std::size_t s = 0; s < S; ++s) {
      std::optional<FittedSuite> suite;
      std::string fit_error;
      try {
        suite = fit_suite(d, specs[s], bases, o.policy, o.fit);
      } catch (const Error& e) {
        fit_error = e.what();
      }
      for (std::size_t e = 0; e < E; ++e) {
        ReplicationRecord& r = result.records[(task * S + s) * E + e];
        r.scenario = specs[s].name;
        r.n = n;
        r.rep = rep;
        r.estimator = o.estimators[e];
        if (!suite) {
          r.failed = true;
          r.error = fit_error;
          continue;
        }
        try {
          const EstimateReport rep_report =
              run_estimator(o.estimators[e], d, o.policy, specs[s], bases, *suite, o);
          r.value = rep_report.value;
          r.se = rep_report.se;
          r.ci_low = rep_report.ci_low;
          r.ci_high = rep_report.ci_high;
          r.covered = r.ci_low <= result.truth && result.truth <= r.ci_high;
        } catch (const Error& ex) {
          r.failed = true;
          r.error = ex.what();
        }
      }
    }
  });
  result.summaries = summarize(result.records, result.truth);
  return result;
}

OplResult run_opl_experiment(const OplOptions& o) {
  if (o.reps < 1) throw ConfigError("reps must be >= 1");
  const ScenarioSpec spec = ScenarioSpec::preset(o.scenario);
  const ModelBases bases = correct_bases(o.config);
  OplResult result;
  DeConfig star_de = o.de;
  star_de.seed = mix_seed(o.seed, 0x73746172ULL);
  result.optimal = true_optimal_policy(o.config, star_de, o.optimum, mix_seed(o.seed, 1));
  result.optimal_value = true_value(result.optimal, o.config, o.value_m, mix_seed(o.seed, 2),
                                    o.value_inner, o.threads)
                             .value;

  const std::size_t K = o.objectives.size();
  const auto R = static_cast<std::size_t>(o.reps);
  const std::size_t tasks = o.n_list.size() * R;
  result.records.resize(tasks * K);
  parallel_for(tasks, o.threads, [&](std::size_t task) {
    const std::size_t ni = task / R;
    const int rep = static_cast<int>(task % R);
    const std::size_t n = o.n_list[ni];
    const Dataset d = simulate(o.config, n, mix_seed(o.seed, n, static_cast<std::uint64_t>(rep)));
    for (std::size_t k = 0; k < K; ++k) {
      ReplicationRecord& r = result.records[task * K + k];
      r.scenario = spec.name;
      r.n = n;
      r.rep = rep;
      r.estimator = objective_name(o.objectives[k]);
      try {
        LearnOptions lo;
        lo.objective = o.objectives[k];
        lo.de = o.de;
        lo.de.seed = mix_seed(o.de.seed, n, static_cast<std::uint64_t>(rep));
        lo.de.threads = 1;
        lo.bases = bases;
        lo.fit = o.fit;
        const LearnResult lr = learn(d, spec, lo);
        r.value = lr.value_report.value;
        r.se = lr.value_report.se;
        r.ci_low = lr.value_report.ci_low;
        r.ci_high = lr.value_report.ci_high;
        r.covered = r.ci_low <= result.optimal_value && result.optimal_value <= r.ci_high;
        r.pcd_as = pcd_as(lr.policy, result.optimal, o.config, o.pcd_m,
                          mix_seed(o.seed, 3, static_cast<std::uint64_t>(rep)));
        r.true_value = true_value(lr.policy, o.config, o.value_m, mix_seed(o.seed, 2),
                                  o.value_inner)
                           .value;
      } catch (const Error& ex) {
        r.failed = true;
        r.error = ex.what();
      }
    }
  });
  result.summaries = summarize(result.records, result.optimal_value);
  return result;
}

void write_records_csv(const std::vector<ReplicationRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "scenario,n,rep,estimator,value,se,ci_low,ci_high,covered,pcd_as,true_value,error\n";
  for (const ReplicationRecord& r : records) {
    out << r.scenario << ',' << r.n << ',' << r.rep << ',' << r.estimator << ',';
    if (r.failed) {
      out << ",,,,,,," << '"' << r.error << '"' << '\n';
      continue;
    }
    out << format_double(r.value) << ',' << format_double(r.se) << ','
        << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ','
        << (r.covered ? 1 : 0) << ',' << format_double(r.pcd_as) << ','
        << format_double(r.true_value) << ",\n";
  }
}

std::vector<std::string> write_summaries(const std::vector<ReplicationSummary>& summaries,
                                         const std::string& prefix) {
  std::vector<std::string> paths;
  for (const ReplicationSummary& s : summaries) {
    const std::string path =
        prefix + "_" + s.estimator + "_" + s.scenario + "_n" + std::to_string(s.n) + ".json";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << s.to_json() << '\n';
    paths.push_back(path);
  }
  return paths;
}

}  // namespace asv
