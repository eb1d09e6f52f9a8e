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

// Feature maps over named covariates and linear predictors built from them.
//
// Formula grammar (whitespace ignored):
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := number | name ['^' integer] | 'exp(' name ')' | 'ns(' name ')'
// A term made only of numbers is the intercept. 'ns(x)' adds a natural cubic
// spline block in x whose knots are placed later from data.

#ifndef ASV_FORMULA_HPP_
#define ASV_FORMULA_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "asv/numeric.hpp"

namespace asv {

struct Factor {
  int var = 0;
  int power = 1;     // x^power
  bool exp = false;  // exp(x); power is 1

  friend bool operator==(const Factor&, const Factor&) = default;
  friend auto operator<=>(const Factor&, const Factor&) = default;
};

// Product of factors; empty means the constant 1.
struct Monomial {
  std::vector<Factor> factors;

  double eval(Point x) const;
  bool involves(int var) const;
  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

// Natural cubic spline in one variable: columns x, N_3..N_K for K knots.
struct SplineBlock {
  int var = 0;
  std::vector<double> knots;  // empty until placed

  std::size_t width() const { return knots.size() >= 3 ? knots.size() - 1 : 1; }
  void eval(double x, double* out) const;
};

// Unique, sorted sample quantiles at the given probabilities.
std::vector<double> quantile_knots(std::vector<double> values,
                                   const std::vector<double>& probs);
std::vector<double> default_knot_probs();

class FeatureMap {
 public:
  FeatureMap() = default;
  explicit FeatureMap(std::vector<std::string> variables)
      : variables_(std::move(variables)) {}

  static FeatureMap parse(std::string_view formula,
                          std::vector<std::string> variables);
  static FeatureMap intercept_only(std::vector<std::string> variables);
  // Intercept plus every variable linearly.
  static FeatureMap linear(std::vector<std::string> variables);
  // exp(var) with no intercept.
  static FeatureMap exp_no_intercept(std::vector<std::string> variables,
                                     int var);

  void add_term(Monomial m);
  void add_spline(int var, std::vector<double> knots = {});
  // Places knots for every unplaced spline from the given points (rows).
  void place_knots(const Eigen::MatrixXd& points);

  std::size_t size() const;
  std::size_t num_variables() const { return variables_.size(); }
  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  const std::vector<SplineBlock>& splines() const { return splines_; }
  bool has_intercept() const;
  int variable_index(std::string_view name) const;

  void evaluate(Point x, double* out) const;
  std::vector<double> evaluate(Point x) const;
  // One row per point.
  Eigen::MatrixXd design(const Eigen::MatrixXd& points) const;

  std::string to_string() const;

 private:
  std::vector<std::string> variables_;
  std::vector<Monomial> terms_;
  std::vector<SplineBlock> splines_;
};

// sum_j coef_j * term_j(x).
struct LinearPredictor {
  FeatureMap map;
  std::vector<double> coef;

  static LinearPredictor parse(std::string_view formula,
                               std::vector<std::string> variables);
  double operator()(Point x) const;
  // Drops every term touching one of `vars`; used to derive per-arm bases.
  LinearPredictor without(const std::vector<int>& vars) const;
  std::string to_string() const;
};

std::string monomial_string(const Monomial& m,
                            const std::vector<std::string>& variables);

}  // namespace asv

#endif  // ASV_FORMULA_HPP_
