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

#include "asv/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "asv/error.hpp"

namespace asv {
namespace {

struct ParsedTerm {
  double coef = 1.0;
  Monomial mono;
  int spline_var = -1;
};

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars) {}

  std::vector<ParsedTerm> parse() {
    std::vector<ParsedTerm> out;
    skip();
    double sign = 1.0;
    if (peek() == '+') {
      ++pos_;
    } else if (peek() == '-') {
      ++pos_;
      sign = -1.0;
    }
    for (;;) {
      ParsedTerm t = term();
      t.coef *= sign;
      out.push_back(std::move(t));
      skip();
      if (pos_ >= text_.size()) break;
      const char c = text_[pos_++];
      if (c == '+') {
        sign = 1.0;
      } else if (c == '-') {
        sign = -1.0;
      } else {
        fail(std::string("unexpected '") + c + "'");
      }
    }
    return out;
  }

 private:
  ParsedTerm term() {
    ParsedTerm t;
    for (;;) {
      factor(t);
      skip();
      if (peek() != '*') break;
      ++pos_;
    }
    std::sort(t.mono.factors.begin(), t.mono.factors.end());
    // Merge repeated plain factors into powers.
    std::vector<Factor> merged;
    for (const Factor& f : t.mono.factors) {
      if (!merged.empty() && !f.exp && !merged.back().exp &&
          merged.back().var == f.var) {
        merged.back().power += f.power;
      } else {
        merged.push_back(f);
      }
    }
    std::sort(merged.begin(), merged.end());
    t.mono.factors = std::move(merged);
    if (t.spline_var >= 0 && !t.mono.factors.empty()) {
      fail("ns() cannot be multiplied by other variables");
    }
    return t;
  }

  void factor(ParsedTerm& t) {
    skip();
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      t.coef *= number();
      return;
    }
    if (c == '(') {
      fail("parentheses are only allowed in exp() and ns()");
    }
    const std::string name = identifier();
    if (name == "exp" || name == "ns") {
      expect('(');
      const int var = variable(identifier());
      expect(')');
      if (name == "exp") {
        t.mono.factors.push_back({var, 1, true});
      } else {
        if (t.spline_var >= 0) fail("only one ns() per term");
        t.spline_var = var;
      }
      return;
    }
    const int var = variable(name);
    int power = 1;
    skip();
    if (peek() == '^') {
      ++pos_;
      skip();
      const double p = number();
      if (p < 1 || p != std::floor(p)) fail("powers must be positive integers");
      power = static_cast<int>(p);
    }
    t.mono.factors.push_back({var, power, false});
  }

  double number() {
    skip();
    const char* begin = text_.data() + pos_;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
    if (ec != std::errc()) fail("expected a number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  std::string identifier() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  int variable(const std::string& name) {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) return static_cast<int>(i);
    }
    fail("unknown variable '" + name + "'");
    return -1;
  }

  void expect(char c) {
    skip();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("formula '" + std::string(text_) + "': " + what +
                      " at position " + std::to_string(pos_));
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double Monomial::eval(Point x) const {
  double v = 1.0;
  for (const Factor& f : factors) {
    const double xi = x[static_cast<std::size_t>(f.var)];
    if (f.exp) {
      v *= std::exp(xi);
    } else {
      double p = xi;
      for (int k = 1; k < f.power; ++k) p *= xi;
      v *= p;
    }
  }
  return v;
}

bool Monomial::involves(int var) const {
  return std::any_of(factors.begin(), factors.end(),
                     [var](const Factor& f) { return f.var == var; });
}

void SplineBlock::eval(double x, double* out) const {
  out[0] = x;
  const std::size_t k = knots.size();
  if (k < 3) return;
  const double last = knots[k - 1];
  auto cube = [](double v) { return v > 0 ? v * v * v : 0.0; };
  auto d = [&](std::size_t j) {
    return (cube(x - knots[j]) - cube(x - last)) / (last - knots[j]);
  };
  const double d_last = d(k - 2);
  for (std::size_t j = 0; j + 2 < k; ++j) out[j + 1] = d(j) - d_last;
}

std::vector<double> default_knot_probs() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

std::vector<double> quantile_knots(std::vector<double> values,
                                   const std::vector<double>& probs) {
  std::vector<double> knots;
  if (values.empty()) return knots;
  std::sort(values.begin(), values.end());
  for (double q : probs) {
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    knots.push_back(values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]));
  }
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
              knots.end());
  return knots;
}

FeatureMap FeatureMap::parse(std::string_view formula,
                             std::vector<std::string> variables) {
  FeatureMap map(std::move(variables));
  for (ParsedTerm& t : Parser(formula, map.variables_).parse()) {
    if (t.spline_var >= 0) {
      map.add_spline(t.spline_var);
    } else {
      map.add_term(std::move(t.mono));
    }
  }
  return map;
}

FeatureMap FeatureMap::intercept_only(std::vector<std::string> variables) {
  FeatureMap map(std::move(variables));
  map.add_term({});
  return map;
}

FeatureMap FeatureMap::linear(std::vector<std::string> variables) {
  FeatureMap map(std::move(variables));
  map.add_term({});
  for (std::size_t i = 0; i < map.variables_.size(); ++i) {
    map.add_term({{{static_cast<int>(i), 1, false}}});
  }
  return map;
}

FeatureMap FeatureMap::exp_no_intercept(std::vector<std::string> variables,
                                        int var) {
  FeatureMap map(std::move(variables));
  map.add_term({{{var, 1, true}}});
  return map;
}

void FeatureMap::add_term(Monomial m) {
  if (std::find(terms_.begin(), terms_.end(), m) == terms_.end()) {
    terms_.push_back(std::move(m));
  }
}

void FeatureMap::add_spline(int var, std::vector<double> knots) {
  for (SplineBlock& s : splines_) {
    if (s.var == var) {
      s.knots = std::move(knots);
      return;
    }
  }
  splines_.push_back({var, std::move(knots)});
}

void FeatureMap::place_knots(const Eigen::MatrixXd& points) {
  for (SplineBlock& s : splines_) {
    if (!s.knots.empty()) continue;
    std::vector<double> col(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      col[static_cast<std::size_t>(i)] = points(i, s.var);
    }
    s.knots = quantile_knots(std::move(col), default_knot_probs());
  }
}

std::size_t FeatureMap::size() const {
  std::size_t k = terms_.size();
  for (const SplineBlock& s : splines_) k += s.width();
  return k;
}

bool FeatureMap::has_intercept() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const Monomial& m) { return m.factors.empty(); });
}

int FeatureMap::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void FeatureMap::evaluate(Point x, double* out) const {
  std::size_t k = 0;
  for (const Monomial& m : terms_) out[k++] = m.eval(x);
  for (const SplineBlock& s : splines_) {
    s.eval(x[static_cast<std::size_t>(s.var)], out + k);
    k += s.width();
  }
}

std::vector<double> FeatureMap::evaluate(Point x) const {
  std::vector<double> out(size());
  evaluate(x, out.data());
  return out;
}

Eigen::MatrixXd FeatureMap::design(const Eigen::MatrixXd& points) const {
  const auto k = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd out(points.rows(), k);
  std::vector<double> row(static_cast<std::size_t>(k));
  std::vector<double> x(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) x[static_cast<std::size_t>(j)] = points(i, j);
    evaluate(x, row.data());
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

std::string monomial_string(const Monomial& m,
                            const std::vector<std::string>& variables) {
  if (m.factors.empty()) return "1";
  std::string s;
  for (const Factor& f : m.factors) {
    if (!s.empty()) s += "*";
    const std::string& name = variables[static_cast<std::size_t>(f.var)];
    if (f.exp) {
      s += "exp(" + name + ")";
    } else {
      s += name;
      if (f.power > 1) s += "^" + std::to_string(f.power);
    }
  }
  return s;
}

std::string FeatureMap::to_string() const {
  std::string s;
  for (const Monomial& m : terms_) {
    if (!s.empty()) s += " + ";
    s += monomial_string(m, variables_);
  }
  for (const SplineBlock& b : splines_) {
    if (!s.empty()) s += " + ";
    s += "ns(" + variables_[static_cast<std::size_t>(b.var)] + ")";
  }
  return s.empty() ? "0" : s;
}

LinearPredictor LinearPredictor::parse(std::string_view formula,
                                       std::vector<std::string> variables) {
  LinearPredictor lp;
  lp.map = FeatureMap(std::move(variables));
  for (ParsedTerm& t : Parser(formula, lp.map.variables()).parse()) {
    if (t.spline_var >= 0) {
      throw ConfigError("ns() is not allowed in a linear predictor");
    }
    const auto& terms = lp.map.terms();
    const auto it = std::find(terms.begin(), terms.end(), t.mono);
    if (it != terms.end()) {
      lp.coef[static_cast<std::size_t>(it - terms.begin())] += t.coef;
    } else {
      lp.map.add_term(std::move(t.mono));
      lp.coef.push_back(t.coef);
    }
  }
  return lp;
}

double LinearPredictor::operator()(Point x) const {
  double v = 0.0;
  const auto& terms = map.terms();
  for (std::size_t j = 0; j < terms.size(); ++j) v += coef[j] * terms[j].eval(x);
  return v;
}

LinearPredictor LinearPredictor::without(const std::vector<int>& vars) const {
  LinearPredictor out;
  out.map = FeatureMap(map.variables());
  const auto& terms = map.terms();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const bool drop = std::any_of(vars.begin(), vars.end(),
                                  [&](int v) { return terms[j].involves(v); });
    if (drop) continue;
    out.map.add_term(terms[j]);
    out.coef.push_back(coef[j]);
  }
  return out;
}

std::string LinearPredictor::to_string() const {
  std::string s;
  const auto& terms = map.terms();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const double c = coef[j];
    if (s.empty()) {
      if (c < 0) s += "-";
    } else {
      s += c < 0 ? " - " : " + ";
    }
    const std::string mono = monomial_string(terms[j], map.variables());
    if (mono == "1") {
      s += format_real(std::fabs(c));
    } else if (std::fabs(c) == 1.0) {
      s += mono;
    } else {
      s += format_real(std::fabs(c)) + "*" + mono;
    }
  }
  return s.empty() ? "0" : s;
}

}  // namespace asv
