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

#include "asv/policy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "asv/error.hpp"
#include "json.hpp"

namespace asv {
namespace {

double score(const std::vector<double>& beta, Point h) {
  if (h.size() + 1 != beta.size()) throw DimensionMismatch(beta.size() - 1, h.size());
  double s = beta[0];
  for (std::size_t j = 0; j < h.size(); ++j) s += beta[j + 1] * h[j];
  return s;
}

std::vector<double> unit(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0) {
    for (double& x : v) x /= n;
  }
  return v;
}

}  // namespace

Stage2Features Stage2Features::parse(const std::string& spec) {
  Stage2Features f{false, false, false};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (item == "x1") {
      f.x1 = true;
    } else if (item == "a1") {
      f.a1 = true;
    } else if (item == "x2") {
      f.x2 = true;
    } else if (!item.empty()) {
      throw ConfigError("unknown stage-2 feature '" + item + "'");
    }
  }
  return f;
}

std::string Stage2Features::to_string() const {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ",";
    s += name;
  };
  add(x1, "x1");
  add(a1, "a1");
  add(x2, "x2");
  return s;
}

int Stage2Features::dim(int p1, int p2) const {
  return (x1 ? p1 : 0) + (a1 ? 1 : 0) + (x2 ? p2 : 0);
}

LinearPolicy::LinearPolicy(std::vector<double> beta1, std::vector<double> beta2,
                           Stage2Features features)
    : beta1_(std::move(beta1)), beta2_(std::move(beta2)), features_(features) {
  if (beta1_.empty() || beta2_.empty()) {
    throw ConfigError("policy coefficient vectors must be non-empty");
  }
}

int LinearPolicy::decide(int stage, Point history) const {
  if (stage == 1) return score(beta1_, history) > 0 ? 1 : 0;
  if (stage == 2) return score(beta2_, history) > 0 ? 1 : 0;
  throw ConfigError("stage must be 1 or 2");
}

int LinearPolicy::decide1(Point x1) const { return decide(1, x1); }

void LinearPolicy::stage2_history(Point x1, int a1, Point x2,
                                  std::vector<double>& out) const {
  out.clear();
  if (features_.x1) out.insert(out.end(), x1.begin(), x1.end());
  if (features_.a1) out.push_back(static_cast<double>(a1));
  if (features_.x2) out.insert(out.end(), x2.begin(), x2.end());
}

int LinearPolicy::decide2(Point x1, int a1, Point x2) const {
  thread_local std::vector<double> h;
  stage2_history(x1, a1, x2, h);
  return decide(2, h);
}

LinearPolicy LinearPolicy::normalized() const {
  return LinearPolicy(unit(beta1_), unit(beta2_), features_);
}

std::string LinearPolicy::to_json() const {
  nlohmann::ordered_json j;
  j["beta1"] = beta1_;
  j["beta2"] = beta2_;
  j["feature_map_2"] = features_.to_string();
  return j.dump(2);
}

LinearPolicy LinearPolicy::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    Stage2Features f;
    if (j.contains("feature_map_2")) {
      f = Stage2Features::parse(j.at("feature_map_2").get<std::string>());
    }
    return LinearPolicy(j.at("beta1").get<std::vector<double>>(),
                        j.at("beta2").get<std::vector<double>>(), f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid policy JSON: ") + e.what());
  }
}

LinearPolicy LinearPolicy::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void LinearPolicy::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << to_json() << '\n';
}

}  // namespace asv
