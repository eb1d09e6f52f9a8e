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

#include "asv/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>

#include <boost/algorithm/string.hpp>
#include <json.hpp>

#include "asv/error.hpp"
#include "asv/learning.hpp"

namespace asv {
namespace {

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  if (boost::trim_copy(v).empty()) return parts;
  boost::split(parts, v, boost::is_any_of(","));
  for (std::string& p : parts) boost::trim(p);
  return parts;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  const std::string v = boost::trim_copy(value);
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = boost::to_lower_copy(boost::trim_copy(value));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad value for " + key + ": '" + value + "'");
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& p : split_list(value)) out.push_back(parse_number<double>(key, p));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  return s.str();
}

constexpr NuisanceId kAllNuisances[] = {
    NuisanceId::kE1,  NuisanceId::kC1,  NuisanceId::kP1,  NuisanceId::kE2,  NuisanceId::kC2,
    NuisanceId::kP2,  NuisanceId::kMu2, NuisanceId::kMP2, NuisanceId::kMMu2};

using Entries = std::vector<std::pair<std::string, std::string>>;

Entries entries(const RunConfig& c) {
  Entries e;
  auto add = [&e](std::string k, std::string v) { e.emplace_back(std::move(k), std::move(v)); };
  add("subcommand", c.subcommand);
  add("mode", c.mode);
  add("data", c.data);
  add("out", c.out);
  add("preset", c.sim.preset);
  add("sim.e1", c.sim.e1);
  add("sim.c1", c.sim.c1);
  add("sim.eta1", format_double(c.sim.eta1));
  add("sim.p1", c.sim.p1);
  add("sim.x2_mean", c.sim.x2_mean);
  add("sim.x2_sd", format_double(c.sim.x2_sd));
  add("sim.e2", c.sim.e2);
  add("sim.c2", c.sim.c2);
  add("sim.eta2", format_double(c.sim.eta2));
  add("sim.p2", c.sim.p2);
  add("sim.mu2", c.sim.mu2);
  add("sim.y_sd", format_double(c.sim.y_sd));
  add("sim.x1_low", format_double(c.sim.x1_low));
  add("sim.x1_high", format_double(c.sim.x1_high));
  add("scenario", c.spec.name);
  for (NuisanceId id : kAllNuisances) {
    add(std::string("spec.") + nuisance_name(id), spec_name(c.spec[id]));
  }
  add("policy.json", c.policy ? nlohmann::ordered_json::parse(c.policy->to_json()).dump() : "none");
  add("features", c.features.to_string());
  add("bases", c.bases);
  add("n", std::to_string(c.n));
  add("n_list", join(c.n_list));
  add("reps", std::to_string(c.reps));
  add("seed", std::to_string(c.seed));
  add("scenarios", join(c.scenarios));
  add("estimator", c.estimator);
  add("estimators", join(c.estimators));
  add("objective", c.objective);
  add("objectives", join(c.objectives));
  add("eps", format_double(c.eps));
  add("clip", c.clip ? format_double(*c.clip) : "none");
  add("bootstrap", std::to_string(c.bootstrap));
  add("folds", std::to_string(c.folds));
  add("stratified_folds", c.stratified_folds ? "true" : "false");
  add("de.pop_factor", std::to_string(c.de.pop_factor));
  add("de.F", format_double(c.de.F));
  add("de.CR", format_double(c.de.CR));
  add("de.max_gen", std::to_string(c.de.max_gen));
  add("de.stall_gen", std::to_string(c.de.stall_gen));
  add("de.seed", std::to_string(c.de.seed));
  add("rho_grid", join_doubles(c.rho_grid));
  std::string lambdas;
  for (std::size_t i = 0; i < c.lambda_grid.size(); ++i) {
    lambdas += (i ? "," : "");
    lambdas += c.lambda_grid[i] ? format_double(*c.lambda_grid[i]) : "null";
  }
  add("lambda_grid", lambdas);
  add("truth_m", std::to_string(c.truth_m));
  add("truth_inner", std::to_string(c.truth_inner));
  add("optimum_m", std::to_string(c.optimum_m));
  add("optimum_inner", std::to_string(c.optimum_inner));
  add("value_m", std::to_string(c.value_m));
  add("value_inner", std::to_string(c.value_inner));
  add("pcd_m", std::to_string(c.pcd_m));
  return e;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Rounded true optimal linear policy of the dgp1 preset.
LinearPolicy default_evaluation_policy() {
  return LinearPolicy({0.94, 0.35}, {-0.52, 0.0, 0.81, 0.26});
}

void RunConfig::set(const std::string& raw_key, const std::string& value) {
  const std::string key = boost::trim_copy(raw_key);
  const std::string v = boost::trim_copy(value);
  auto num = [&](auto& field) { field = parse_number<std::decay_t<decltype(field)>>(key, v); };

  if (key == "subcommand") {
    subcommand = v;
  } else if (key == "mode") {
    mode = v;
  } else if (key == "data") {
    data = v;
  } else if (key == "out") {
    out = v;
  } else if (key == "preset") {
    sim = SimConfig::preset_config(v);
  } else if (key == "sim.e1") {
    sim.e1 = v;
  } else if (key == "sim.c1") {
    sim.c1 = v;
  } else if (key == "sim.eta1") {
    num(sim.eta1);
  } else if (key == "sim.p1") {
    sim.p1 = v;
  } else if (key == "sim.x2_mean") {
    sim.x2_mean = v;
  } else if (key == "sim.x2_sd") {
    num(sim.x2_sd);
  } else if (key == "sim.e2") {
    sim.e2 = v;
  } else if (key == "sim.c2") {
    sim.c2 = v;
  } else if (key == "sim.eta2") {
    num(sim.eta2);
  } else if (key == "sim.p2") {
    sim.p2 = v;
  } else if (key == "sim.mu2") {
    sim.mu2 = v;
  } else if (key == "sim.y_sd") {
    num(sim.y_sd);
  } else if (key == "sim.x1_low") {
    num(sim.x1_low);
  } else if (key == "sim.x1_high") {
    num(sim.x1_high);
  } else if (key == "scenario") {
    spec = ScenarioSpec::preset(v);
  } else if (key.starts_with("spec.")) {
    const auto id = parse_nuisance(key.substr(5));
    const auto s = parse_spec(v);
    if (!id) throw ConfigError("unknown nuisance '" + key.substr(5) + "'");
    if (!s) throw ConfigError("unknown specification '" + v + "'");
    spec[*id] = *s;
  } else if (key == "policy") {
    policy = LinearPolicy::read(v);
  } else if (key == "policy.json") {
    if (v == "none" || v.empty()) {
      policy.reset();
    } else {
      policy = LinearPolicy::from_json(v);
    }
  } else if (key == "features") {
    features = Stage2Features::parse(v);
  } else if (key == "bases") {
    if (v != "linear" && v != "true") throw ConfigError("bases must be linear or true");
    bases = v;
  } else if (key == "n") {
    num(n);
  } else if (key == "n_list") {
    n_list.clear();
    for (const std::string& p : split_list(v)) n_list.push_back(parse_number<std::size_t>(key, p));
  } else if (key == "reps") {
    num(reps);
  } else if (key == "seed") {
    num(seed);
  } else if (key == "threads") {
    num(threads);
    if (threads < 1) throw ConfigError("threads must be at least 1");
  } else if (key == "scenarios") {
    scenarios = split_list(v);
    for (const std::string& s : scenarios) ScenarioSpec::preset(s);
  } else if (key == "estimator") {
    estimator = v;
  } else if (key == "estimators") {
    estimators = split_list(v);
  } else if (key == "objective") {
    parse_objective(v);
    objective = v;
  } else if (key == "objectives") {
    objectives = split_list(v);
    for (const std::string& o : objectives) parse_objective(o);
  } else if (key == "eps") {
    num(eps);
    if (!(eps >= 0 && eps < 0.5)) throw ConfigError("eps must lie in [0, 0.5)");
  } else if (key == "clip") {
    if (v == "none" || v.empty()) {
      clip.reset();
    } else {
      clip = parse_number<double>(key, v);
      if (!(*clip > 0)) throw ConfigError("clip must be positive");
    }
  } else if (key == "bootstrap") {
    num(bootstrap);
  } else if (key == "folds") {
    num(folds);
    if (folds < 2) throw ConfigError("folds must be at least 2");
  } else if (key == "stratified_folds") {
    stratified_folds = parse_bool(key, v);
  } else if (key == "de.pop_factor") {
    num(de.pop_factor);
  } else if (key == "de.F") {
    num(de.F);
  } else if (key == "de.CR") {
    num(de.CR);
  } else if (key == "de.max_gen") {
    num(de.max_gen);
  } else if (key == "de.stall_gen") {
    num(de.stall_gen);
  } else if (key == "de.seed") {
    num(de.seed);
  } else if (key == "rho_grid") {
    rho_grid = parse_doubles(key, v);
  } else if (key == "lambda_grid") {
    lambda_grid.clear();
    for (const std::string& p : split_list(v)) {
      if (p == "null") {
        lambda_grid.emplace_back();
      } else {
        lambda_grid.emplace_back(parse_number<double>(key, p));
      }
    }
  } else if (key == "truth_m") {
    num(truth_m);
  } else if (key == "truth_inner") {
    num(truth_inner);
  } else if (key == "optimum_m") {
    num(optimum_m);
  } else if (key == "optimum_inner") {
    num(optimum_inner);
  } else if (key == "value_m") {
    num(value_m);
  } else if (key == "value_inner") {
    num(value_inner);
  } else if (key == "pcd_m") {
    num(pcd_m);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::merge_text(const std::string& text) {
  const std::string trimmed = boost::trim_copy(text);
  if (!trimmed.empty() && trimmed.front() == '{') {
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(trimmed);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad manifest: ") + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) {
      throw ConfigError("manifest has no config object");
    }
    for (const auto& [k, v] : j["config"].items()) set(k, v.get<std::string>());
    return;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    boost::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " has no '='");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream s;
  s << in.rdbuf();
  merge_text(s.str());
}

std::string RunConfig::to_text() const {
  std::string s;
  for (const auto& [k, v] : entries(*this)) s += k + " = " + v + "\n";
  return s;
}

Positivity RunConfig::positivity() const {
  Positivity p;
  p.eps = eps;
  p.clip = clip;
  return p;
}

FitOptions RunConfig::fit_options() const {
  FitOptions f;
  f.positivity = positivity();
  return f;
}

LinearPolicy RunConfig::policy_or_default() const {
  return policy ? *policy : default_evaluation_policy();
}

ModelBases RunConfig::model_bases(const Dataset& d) const {
  if (bases == "true") {
    if (d.p1 != 1 || d.p2 != 1) throw ConfigError("true bases need one covariate per stage");
    return correct_bases(sim);
  }
  return ModelBases::linear(d.p1, d.p2);
}

std::string manifest_json(const RunConfig& config, const std::vector<std::string>& outputs) {
  nlohmann::ordered_json j;
  j["tool"] = "asv";
  j["version"] = kVersion;
  j["subcommand"] = config.subcommand;
  j["seed"] = config.seed;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (const auto& [k, v] : entries(config)) c[k] = v;
  j["config"] = c;
  j["outputs"] = outputs;
  return j.dump(2);
}

void write_manifest(const RunConfig& config, const std::vector<std::string>& outputs,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << manifest_json(config, outputs) << '\n';
}

}  // namespace asv
