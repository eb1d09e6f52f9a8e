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

// Logistic regression by IRLS and least-squares mean models.

#ifndef ASV_REGRESSION_HPP_
#define ASV_REGRESSION_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asv/formula.hpp"

namespace asv {

struct LogisticOptions {
  double tolerance = 1e-8;
  int max_iter = 100;
  double ridge = 1e-10;
};

struct FitMeta {
  int iterations = 0;
  double log_likelihood = 0.0;
  bool converged = false;
  bool separated = false;
  std::vector<int> dropped_columns;
  std::vector<std::string> warnings;
};

struct LogisticFit {
  Eigen::VectorXd coef;
  FitMeta meta;
};

// Maximizes sum_i w_i [y_i eta_i - log(1 + exp(eta_i))]. Rank-deficient
// columns are dropped (coefficient 0) with a warning; divergence toward
// perfect prediction sets meta.separated and returns the last iterate.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& w,
                         const LogisticOptions& opts = {});
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const LogisticOptions& opts = {});

// Linearly independent columns (original order) chosen by pivoted QR on
// unit-scaled columns; rows are weighted by sqrt(w) when given.
std::vector<int> independent_columns(const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd* w = nullptr);
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<int>& cols);

struct LeastSquaresFit {
  Eigen::VectorXd coef;
  FitMeta meta;
};

// Weighted least squares with pivoted QR; rank-deficient columns dropped.
LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd* w = nullptr);

class BinaryModel {
 public:
  BinaryModel() = default;
  BinaryModel(FeatureMap map, LogisticFit fit)
      : map_(std::move(map)), fit_(std::move(fit)) {}

  // P(label = 1 | x), strictly inside (0, 1) up to double rounding.
  double predict(Point x) const;
  double linear_predictor(Point x) const;
  const FeatureMap& feature_map() const { return map_; }
  const Eigen::VectorXd& coefficients() const { return fit_.coef; }
  const FitMeta& meta() const { return fit_.meta; }

 private:
  FeatureMap map_;
  LogisticFit fit_;
};

// Fits a BinaryModel on the rows of `points`; knots are placed first.
BinaryModel fit_binary_model(FeatureMap map, const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& labels,
                             const LogisticOptions& opts = {});

enum class MeanKind { kLeastSquares, kSplineBasis };

class MeanModel {
 public:
  MeanModel() = default;
  MeanModel(FeatureMap map, Eigen::VectorXd coef, std::optional<double> clip,
            FitMeta meta = {})
      : map_(std::move(map)), coef_(std::move(coef)), clip_(clip),
        meta_(std::move(meta)) {}

  double predict(Point x) const;
  double raw(Point x) const;
  const FeatureMap& feature_map() const { return map_; }
  const Eigen::VectorXd& coefficients() const { return coef_; }
  std::optional<double> clip() const { return clip_; }
  const FitMeta& meta() const { return meta_; }

 private:
  FeatureMap map_;
  Eigen::VectorXd coef_;
  std::optional<double> clip_;
  FitMeta meta_;
};

// kSplineBasis appends a natural spline in the first variable when the map
// has none. Predictions are clipped to [-clip, clip] when set.
MeanModel fit_mean(FeatureMap map, const Eigen::MatrixXd& points,
                   const Eigen::VectorXd& target, MeanKind kind,
                   std::optional<double> clip = std::nullopt);

}  // namespace asv

#endif  // ASV_REGRESSION_HPP_
