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

#include "asv/regression.hpp"

#include <algorithm>
#include <cmath>

#include "asv/error.hpp"

namespace asv {
namespace {

constexpr double kRankThreshold = 1e-9;
constexpr double kSeparationEta = 25.0;

}  // namespace

std::vector<int> independent_columns(const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd* w) {
  Eigen::MatrixXd z = x;
  if (w != nullptr) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z.row(i) *= std::sqrt((*w)(i));
  }
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double norm = z.col(j).norm();
    if (norm > 0) z.col(j) /= norm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(kRankThreshold);
  const Eigen::Index rank = qr.rank();
  std::vector<int> keep;
  for (Eigen::Index j = 0; j < rank; ++j) {
    keep.push_back(static_cast<int>(qr.colsPermutation().indices()(j)));
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<int>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  return out;
}

namespace {

void record_dropped(FitMeta& meta, const std::vector<int>& keep, Eigen::Index total) {
  for (Eigen::Index j = 0; j < total; ++j) {
    if (!std::binary_search(keep.begin(), keep.end(), static_cast<int>(j))) {
      meta.dropped_columns.push_back(static_cast<int>(j));
    }
  }
  if (!meta.dropped_columns.empty()) {
    meta.warnings.push_back("degenerate design: dropped " +
                            std::to_string(meta.dropped_columns.size()) + " column(s)");
  }
}

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w) {
  CompensatedSum s;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (w(i) == 0) continue;
    s.add(w(i) * (y(i) * eta(i) - softplus(eta(i))));
  }
  return s.value();
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& w, const LogisticOptions& opts) {
  if (x.rows() != y.size() || x.rows() != w.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(x.rows()),
                            static_cast<std::size_t>(y.size()));
  }
  LogisticFit fit;
  fit.coef = Eigen::VectorXd::Zero(x.cols());
  if (x.rows() == 0 || x.cols() == 0) {
    fit.meta.warnings.push_back("empty design");
    return fit;
  }
  const std::vector<int> keep = independent_columns(x, &w);
  record_dropped(fit.meta, keep, x.cols());
  const Eigen::MatrixXd xr = select_columns(x, keep);
  const auto k = xr.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(x.rows());
  double ll = log_likelihood(eta, y, w);

  for (int it = 1; it <= opts.max_iter; ++it) {
    fit.meta.iterations = it;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd resid(x.rows());
    Eigen::VectorXd weight(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double p = logistic(eta(i));
      resid(i) = w(i) * (y(i) - p);
      weight(i) = w(i) * p * (1.0 - p);
    }
    grad = xr.transpose() * resid;
    hess.noalias() = xr.transpose() * weight.asDiagonal() * xr;
    hess.diagonal().array() += opts.ridge;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    Eigen::VectorXd next_eta = xr * next;
    double next_ll = log_likelihood(next_eta, y, w);
    while (next_ll < ll - 1e-12 * std::fabs(ll) && t > 1e-6) {
      t *= 0.5;
      next = beta + t * step;
      next_eta = xr * next;
      next_ll = log_likelihood(next_eta, y, w);
    }
    const double change = (t * step).cwiseAbs().maxCoeff();
    beta = next;
    eta = next_eta;
    ll = next_ll;
    if (change < opts.tolerance) {
      fit.meta.converged = true;
      break;
    }
    double max_eta = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      if (w(i) > 0) max_eta = std::max(max_eta, std::fabs(eta(i)));
    }
    if (max_eta > kSeparationEta) {
      fit.meta.separated = true;
      fit.meta.warnings.push_back("separation: fitted probabilities reach 0 or 1");
      break;
    }
  }
  if (!fit.meta.converged && !fit.meta.separated) {
    fit.meta.warnings.push_back("IRLS did not converge in " +
                                std::to_string(opts.max_iter) + " iterations");
  }
  fit.meta.log_likelihood = ll;
  for (std::size_t j = 0; j < keep.size(); ++j) fit.coef(keep[j]) = beta(static_cast<Eigen::Index>(j));
  return fit;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const LogisticOptions& opts) {
  return fit_logistic(x, y, Eigen::VectorXd::Ones(x.rows()), opts);
}

LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd* w) {
  if (x.rows() != y.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(x.rows()),
                            static_cast<std::size_t>(y.size()));
  }
  LeastSquaresFit fit;
  fit.coef = Eigen::VectorXd::Zero(x.cols());
  if (x.rows() == 0 || x.cols() == 0) {
    fit.meta.warnings.push_back("empty design");
    return fit;
  }
  const std::vector<int> keep = independent_columns(x, w);
  record_dropped(fit.meta, keep, x.cols());
  Eigen::MatrixXd xr = select_columns(x, keep);
  Eigen::VectorXd yr = y;
  if (w != nullptr) {
    for (Eigen::Index i = 0; i < xr.rows(); ++i) {
      const double s = std::sqrt((*w)(i));
      xr.row(i) *= s;
      yr(i) *= s;
    }
  }
  const Eigen::VectorXd beta = xr.colPivHouseholderQr().solve(yr);
  for (std::size_t j = 0; j < keep.size(); ++j) fit.coef(keep[j]) = beta(static_cast<Eigen::Index>(j));
  fit.meta.converged = true;
  fit.meta.iterations = 1;
  return fit;
}

double BinaryModel::linear_predictor(Point x) const {
  const std::vector<double> f = map_.evaluate(x);
  double eta = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) eta += fit_.coef(static_cast<Eigen::Index>(j)) * f[j];
  return eta;
}

double BinaryModel::predict(Point x) const { return logistic(linear_predictor(x)); }

BinaryModel fit_binary_model(FeatureMap map, const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& labels,
                             const LogisticOptions& opts) {
  map.place_knots(points);
  const Eigen::MatrixXd x = map.design(points);
  return BinaryModel(std::move(map), fit_logistic(x, labels, opts));
}

double MeanModel::raw(Point x) const {
  const std::vector<double> f = map_.evaluate(x);
  double v = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) v += coef_(static_cast<Eigen::Index>(j)) * f[j];
  return v;
}

double MeanModel::predict(Point x) const {
  const double v = raw(x);
  if (clip_) return std::clamp(v, -*clip_, *clip_);
  return v;
}

MeanModel fit_mean(FeatureMap map, const Eigen::MatrixXd& points,
                   const Eigen::VectorXd& target, MeanKind kind,
                   std::optional<double> clip) {
  if (kind == MeanKind::kSplineBasis && map.splines().empty()) map.add_spline(0);
  map.place_knots(points);
  const Eigen::MatrixXd x = map.design(points);
  LeastSquaresFit fit = fit_least_squares(x, target);
  return MeanModel(std::move(map), std::move(fit.coef), clip, std::move(fit.meta));
}

}  // namespace asv
