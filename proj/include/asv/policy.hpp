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

// Two-stage linear threshold policies pi_k = 1{h_k . beta_k > 0}.

#ifndef ASV_POLICY_HPP_
#define ASV_POLICY_HPP_

#include <string>
#include <vector>

#include "asv/numeric.hpp"

namespace asv {

// Which blocks enter the stage-2 history h2, in the order x1, a1, x2.
struct Stage2Features {
  bool x1 = true;
  bool a1 = true;
  bool x2 = true;

  static Stage2Features parse(const std::string& spec);  // e.g. "x1,a1,x2"
  std::string to_string() const;
  int dim(int p1, int p2) const;
  friend bool operator==(const Stage2Features&, const Stage2Features&) = default;
};

class LinearPolicy {
 public:
  LinearPolicy() = default;
  // Intercept first in each coefficient vector.
  LinearPolicy(std::vector<double> beta1, std::vector<double> beta2,
               Stage2Features features = {});

  // history excludes the intercept: x1 for stage 1, h2 for stage 2.
  int decide(int stage, Point history) const;
  int decide1(Point x1) const;
  int decide2(Point x1, int a1, Point x2) const;
  void stage2_history(Point x1, int a1, Point x2, std::vector<double>& out) const;

  // Each stage vector scaled to unit Euclidean norm (zero vectors kept).
  LinearPolicy normalized() const;

  const std::vector<double>& beta1() const { return beta1_; }
  const std::vector<double>& beta2() const { return beta2_; }
  const Stage2Features& features() const { return features_; }

  // {"beta1": [...], "beta2": [...], "feature_map_2": "x1,a1,x2"}
  std::string to_json() const;
  static LinearPolicy from_json(const std::string& text);
  static LinearPolicy read(const std::string& path);
  void write(const std::string& path) const;

  friend bool operator==(const LinearPolicy&, const LinearPolicy&) = default;

 private:
  std::vector<double> beta1_;
  std::vector<double> beta2_;
  Stage2Features features_;
};

}  // namespace asv

#endif  // ASV_POLICY_HPP_
