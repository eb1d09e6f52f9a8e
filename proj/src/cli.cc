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

#include "asv/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "asv/crossfit.hpp"
#include "asv/error.hpp"
#include "asv/estimators.hpp"
#include "asv/experiment.hpp"
#include "asv/learning.hpp"
#include "asv/numeric.hpp"
#include "asv/sensitivity.hpp"
#include "asv/simulation.hpp"

namespace asv {
namespace {

using ordered_json = nlohmann::ordered_json;

struct Flag {
  std::string name;  // command-line option, e.g. "--rho-grid"
  std::string key;   // config key
  std::string help;
  bool is_flag = false;
};

const std::vector<Flag>& common_flags() {
  static const std::vector<Flag> f = {
      {"--seed", "seed", "random seed"},
      {"--out", "out", "output path (prefix for experiment)"},
      {"--eps", "eps", "positivity trimming level"},
      {"--clip", "clip", "outcome clip bound, or none"},
      {"--bootstrap", "bootstrap", "bootstrap replicates"},
  };
  return f;
}

const std::map<std::string, std::vector<Flag>>& command_flags() {
  static const std::map<std::string, std::vector<Flag>> m = {
      {"simulate", {{"--preset", "preset", "dgp1, dgp2 or dgp1_monotone"}, {"--n", "n", "rows"}}},
      {"evaluate",
       {{"--data", "data", "dataset CSV"},
        {"--policy", "policy", "policy JSON file"},
        {"--scenario", "scenario", "M1..M6"},
        {"--estimator", "estimator", "mr, q_plugin, ipw, ipw_hajek or aipw"},
        {"--bases", "bases", "linear or true"},
        {"--preset", "preset", "formulas for --bases true"}}},
      {"crossfit",
       {{"--data", "data", "dataset CSV"},
        {"--policy", "policy", "policy JSON file"},
        {"--scenario", "scenario", "M1..M6"},
        {"--folds", "folds", "number of folds"},
        {"--stratified-folds", "stratified_folds", "balance folds by trajectory pattern", true},
        {"--bases", "bases", "linear or true"},
        {"--preset", "preset", "formulas for --bases true"}}},
      {"learn",
       {{"--data", "data", "dataset CSV"},
        {"--scenario", "scenario", "M1..M6"},
        {"--objective", "objective", "mr or aipw"},
        {"--features", "features", "stage-2 features, e.g. x1,a1,x2"},
        {"--pop-factor", "de.pop_factor", "population per dimension"},
        {"--F", "de.F", "mutation factor"},
        {"--CR", "de.CR", "crossover rate"},
        {"--max-gen", "de.max_gen", "generation limit"},
        {"--stall-gen", "de.stall_gen", "stall limit"},
        {"--de-seed", "de.seed", "optimizer seed"},
        {"--bases", "bases", "linear or true"},
        {"--preset", "preset", "formulas for --bases true"}}},
      {"sensitivity",
       {{"--data", "data", "dataset CSV"},
        {"--policy", "policy", "policy JSON file"},
        {"--scenario", "scenario", "M1..M6"},
        {"--rho-grid", "rho_grid", "comma-separated rho values"},
        {"--lambda-grid", "lambda_grid", "comma-separated lambda values or null"},
        {"--bases", "bases", "linear or true"},
        {"--preset", "preset", "formulas for --bases true"}}},
      {"experiment",
       {{"--preset", "preset", "dgp1, dgp2 or dgp1_monotone"},
        {"--reps", "reps", "replications"},
        {"--n", "n_list", "comma-separated sample sizes"},
        {"--scenarios", "scenarios", "comma-separated scenarios (ope)"},
        {"--scenario", "scenario", "scenario (opl)"},
        {"--estimators", "estimators", "comma-separated estimators (ope)"},
        {"--objectives", "objectives", "comma-separated objectives (opl)"},
        {"--policy", "policy", "evaluation policy JSON file (ope)"},
        {"--truth-m", "truth_m", "truth nodes (ope)"},
        {"--truth-inner", "truth_inner", "truth X2 nodes (ope)"},
        {"--optimum-m", "optimum_m", "optimum search nodes (opl)"},
        {"--optimum-inner", "optimum_inner", "optimum search X2 nodes (opl)"},
        {"--value-m", "value_m", "policy value nodes (opl)"},
        {"--value-inner", "value_inner", "policy value X2 nodes (opl)"},
        {"--pcd-m", "pcd_m", "agreement nodes (opl)"},
        {"--pop-factor", "de.pop_factor", "population per dimension"},
        {"--max-gen", "de.max_gen", "generation limit"},
        {"--stall-gen", "de.stall_gen", "stall limit"},
        {"--de-seed", "de.seed", "optimizer seed"}}},
      {"validate", {{"--data", "data", "dataset CSV"}}},
      {"run", {}},
  };
  return m;
}

const char* command_help(const std::string& name) {
  if (name == "simulate") return "Simulate a dataset";
  if (name == "evaluate") return "Estimate the always-survivor value of a policy";
  if (name == "crossfit") return "Cross-fitted multiply robust estimate";
  if (name == "learn") return "Learn a linear policy";
  if (name == "sensitivity") return "Sensitivity grid over (rho, lambda)";
  if (name == "experiment") return "Replication experiments (ope | opl)";
  if (name == "validate") return "Validate a dataset";
  return "Execute the configuration in --config";
}

Dataset load_data(const RunConfig& c) {
  if (c.data.empty()) throw ConfigError("--data is required");
  return read_csv(c.data);
}

std::string require_out(const RunConfig& c) {
  if (c.out.empty()) throw ConfigError("--out is required");
  return c.out;
}

EstimatorOptions estimator_options(const RunConfig& c) {
  EstimatorOptions o;
  o.positivity = c.positivity();
  o.bootstrap = c.bootstrap;
  o.seed = c.seed;
  return o;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << text << '\n';
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

// Prints the JSON document, and with --out also writes it plus a manifest.
void emit(const RunConfig& c, const std::string& json, std::ostream& out) {
  out << json << '\n';
  if (c.out.empty()) return;
  write_text(c.out, json);
  write_manifest(c, {c.out}, manifest_path(c.out));
}

void cmd_simulate(const RunConfig& c, std::ostream& out) {
  const std::string path = require_out(c);
  const Dataset d = simulate(c.sim, c.n, c.seed);
  write_csv(d, path);
  write_manifest(c, {path}, manifest_path(path));
  const MarginalRates r = marginal_rates(d);
  ordered_json j;
  j["rows"] = d.size();
  j["censor1"] = r.censor1;
  j["survive1"] = r.survive1;
  j["censor2"] = r.censor2;
  j["survive2"] = r.survive2;
  out << j.dump(2) << '\n';
}

void cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_data(c);
  if (!c.policy) throw ConfigError("--policy is required");
  const ModelBases bases = c.model_bases(d);
  const EstimatorOptions opts = estimator_options(c);
  EstimateReport r;
  if (c.estimator == "aipw") {
    const FittedAipwSuite s = fit_aipw_suite(d, c.spec, bases, *c.policy, c.fit_options());
    r = v_aipw(d, *c.policy, s, opts);
  } else {
    const FittedSuite s = fit_suite(d, c.spec, bases, *c.policy, c.fit_options());
    if (c.estimator == "mr") {
      r = v_mr(d, *c.policy, s, opts);
    } else if (c.estimator == "q_plugin") {
      r = v_q_plugin(d, *c.policy, s, opts);
    } else if (c.estimator == "ipw" || c.estimator == "ipw_hajek") {
      EstimatorOptions o = opts;
      if (c.estimator == "ipw_hajek") o.ipw_form = IpwForm::kHajek;
      r = v_ipw(d, *c.policy, s, o);
    } else {
      throw ConfigError("unknown estimator '" + c.estimator + "'");
    }
  }
  emit(c, r.to_json(), out);
}

void cmd_crossfit(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_data(c);
  if (!c.policy) throw ConfigError("--policy is required");
  CrossfitOptions o;
  o.stratified = c.stratified_folds;
  o.bases = c.model_bases(d);
  o.fit = c.fit_options();
  o.threads = c.threads;
  const CrossfitResult r = crossfit_mr(d, *c.policy, c.spec, c.folds, c.seed, o);
  ordered_json j;
  j["report"] = ordered_json::parse(r.report.to_json());
  j["folds"] = c.folds;
  j["fold_values"] = r.fold_values;
  j["fold_sizes"] = r.fold_sizes;
  emit(c, j.dump(2), out);
}

void cmd_learn(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_data(c);
  LearnOptions o;
  o.objective = parse_objective(c.objective);
  o.de = c.de;
  o.de.threads = c.threads;
  o.features = c.features;
  o.bases = c.model_bases(d);
  o.fit = c.fit_options();
  const LearnResult r = learn(d, c.spec, o);
  ordered_json j;
  j["policy"] = ordered_json::parse(r.policy.to_json());
  j["objective"] = c.objective;
  j["value"] = ordered_json::parse(r.value_report.to_json());
  j["evaluations"] = r.evaluations;
  j["generations"] = r.trace.empty() ? 0 : r.trace.size() - 1;
  j["stalled"] = r.stalled;
  out << j.dump(2) << '\n';
  if (c.out.empty()) return;
  r.policy.write(c.out);
  write_manifest(c, {c.out}, manifest_path(c.out));
}

void cmd_sensitivity(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_data(c);
  if (!c.policy) throw ConfigError("--policy is required");
  const std::string path = require_out(c);
  const FittedSuite s = fit_suite(d, c.spec, c.model_bases(d), *c.policy, c.fit_options());
  const SensitivityGrid g =
      sensitivity_grid(d, *c.policy, s, c.rho_grid, c.lambda_grid, estimator_options(c), c.threads);
  write_grid_csv(g, path);
  write_manifest(c, {path}, manifest_path(path));
  ordered_json j;
  j["baseline"] = ordered_json::parse(g.baseline.to_json());
  j["points"] = g.points.size();
  j["max_relative_deviation"] = g.max_relative_deviation;
  out << j.dump(2) << '\n';
}

void cmd_experiment(const RunConfig& c, std::ostream& out) {
  const std::string prefix = require_out(c);
  std::vector<ReplicationRecord> records;
  std::vector<ReplicationSummary> summaries;
  ordered_json j;
  if (c.mode == "ope") {
    OpeOptions o;
    o.config = c.sim;
    o.scenarios = c.scenarios;
    o.n_list = c.n_list;
    o.reps = c.reps;
    o.policy = c.policy_or_default();
    o.seed = c.seed;
    o.estimators = c.estimators;
    o.fit = c.fit_options();
    o.bootstrap = c.bootstrap;
    o.truth_m = c.truth_m;
    o.truth_inner = c.truth_inner;
    o.threads = c.threads;
    ExperimentResult r = run_ope_experiment(o);
    j["truth"] = r.truth;
    j["policy"] = ordered_json::parse(o.policy.to_json());
    records = std::move(r.records);
    summaries = std::move(r.summaries);
  } else if (c.mode == "opl") {
    OplOptions o;
    o.config = c.sim;
    o.scenario = c.spec.name;
    o.n_list = c.n_list;
    o.reps = c.reps;
    o.objectives.clear();
    for (const std::string& s : c.objectives) o.objectives.push_back(parse_objective(s));
    o.seed = c.seed;
    o.de = c.de;
    o.fit = c.fit_options();
    o.optimum = {c.optimum_m, c.optimum_inner};
    o.value_m = c.value_m;
    o.value_inner = c.value_inner;
    o.pcd_m = c.pcd_m;
    o.threads = c.threads;
    OplResult r = run_opl_experiment(o);
    j["optimal_value"] = r.optimal_value;
    j["optimal_policy"] = ordered_json::parse(r.optimal.to_json());
    records = std::move(r.records);
    summaries = std::move(r.summaries);
  } else {
    throw ConfigError("experiment mode must be ope or opl");
  }
  const std::string records_path = prefix + "_records.csv";
  write_records_csv(records, records_path);
  std::vector<std::string> outputs = write_summaries(summaries, prefix);
  outputs.insert(outputs.begin(), records_path);
  write_manifest(c, outputs, manifest_path(prefix));
  ordered_json arr = ordered_json::array();
  for (const ReplicationSummary& s : summaries) arr.push_back(ordered_json::parse(s.to_json()));
  j["summaries"] = arr;
  out << j.dump(2) << '\n';
}

void cmd_validate(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_data(c);
  validate(d);
  const MarginalRates r = marginal_rates(d);
  ordered_json j;
  j["valid"] = true;
  j["rows"] = d.size();
  j["p1"] = d.p1;
  j["p2"] = d.p2;
  j["censor1"] = r.censor1;
  j["survive1"] = r.survive1;
  j["censor2"] = r.censor2;
  j["survive2"] = r.survive2;
  out << j.dump(2) << '\n';
}

}  // namespace

void execute(const RunConfig& c, std::ostream& out) {
  const std::string& s = c.subcommand;
  if (s == "simulate") return cmd_simulate(c, out);
  if (s == "evaluate") return cmd_evaluate(c, out);
  if (s == "crossfit") return cmd_crossfit(c, out);
  if (s == "learn") return cmd_learn(c, out);
  if (s == "sensitivity") return cmd_sensitivity(c, out);
  if (s == "experiment") return cmd_experiment(c, out);
  if (s == "validate") return cmd_validate(c, out);
  throw ConfigError("unknown subcommand '" + s + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Always-survivor value estimation and policy learning", "asv");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  struct Bound {
    std::string key;
    CLI::Option* option;
  };
  std::map<std::string, std::vector<Bound>> bound;
  std::map<std::string, std::string> storage;  // "<command> <key>" -> value
  std::string config_path;
  std::string mode;
  int threads = default_threads();

  for (const auto& [name, flags] : command_flags()) {
    CLI::App* sub = app.add_subcommand(name, command_help(name));
    sub->add_option("--config", config_path, "flat key = value config or manifest");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    if (name == "experiment") {
      sub->add_option("mode", mode, "ope or opl")->required()->check(CLI::IsMember({"ope", "opl"}));
    }
    std::vector<Flag> all = flags;
    if (name != "run" && name != "validate") {
      all.insert(all.end(), common_flags().begin(), common_flags().end());
    }
    for (const Flag& f : all) {
      std::string& slot = storage[name + " " + f.key];
      CLI::Option* opt = f.is_flag ? sub->add_flag(f.name, f.help)
                                   : sub->add_option(f.name, slot, f.help);
      bound[name].push_back({f.key, opt});
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  RunConfig config;
  try {
    if (!config_path.empty()) config.merge_file(config_path);
    if (name == "run") {
      if (config_path.empty()) throw ConfigError("run needs --config");
      if (config.subcommand.empty() || config.subcommand == "run") {
        throw ConfigError("config names no subcommand");
      }
    } else {
      config.subcommand = name;
    }
    if (!mode.empty()) config.mode = mode;
    config.threads = threads;
    // Resetting keys go first so that finer keys override them.
    std::vector<Bound> order = bound[name];
    std::stable_partition(order.begin(), order.end(), [](const Bound& b) {
      return b.key == "preset" || b.key == "scenario";
    });
    for (const Bound& b : order) {
      if (b.option->count() == 0) continue;
      const std::string& v = storage[name + " " + b.key];
      config.set(b.key, b.option->get_items_expected_max() == 0 ? "true" : v);
    }
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n' << app.get_subcommand(name)->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }

  try {
    execute(config, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace asv
