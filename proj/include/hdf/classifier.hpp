/*
 * Copyright 2026 The HDF Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdf/error.hpp"
#include "hdf/parallel.hpp"
#include "hdf/random.hpp"

namespace hdf {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct SolverOptions {
  double tolerance = 1e-4;
  int max_iterations = 1000;
};

struct SolverStats {
  int iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  // Gradient norm at (w, b) = 0; the stopping threshold is tolerance * max(1, this).
  double reference_gradient_norm = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // value after every accepted step, starting point first
};

struct BinaryModel {
  Vector weights;
  double bias = 0.0;
  SolverStats stats;
};

namespace detail {

// log(1 + exp(-t)) without overflow.
inline double log1p_exp_neg(double t) {
  return t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

/// f(w, b) = 0.5 |w|^2 + C * sum_i log(1 + exp(-y_i (w.x_i + b))), with the
/// bias left unregularized. Labels are +1 / -1.
class LogisticObjective {
 public:
  LogisticObjective(const Matrix& features, const Vector& labels, double cost)
      : x_(features), y_(labels), cost_(cost) {}

  double value(const Vector& w, double b) const {
    const Vector margin = margins(w, b);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margin.size(); ++i) loss += detail::log1p_exp_neg(margin[i]);
    return 0.5 * w.squaredNorm() + cost_ * loss;
  }

  /// Gradient; also leaves the per-sample curvature sigma(1 - sigma) in
  /// `curvature` when non-null.
  void gradient(const Vector& w, double b, Vector& grad_w, double& grad_b, Vector* curvature = nullptr) const {
    const Vector margin = margins(w, b);
    Vector coef(margin.size());
    if (curvature) curvature->resize(margin.size());
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
      const double s = detail::sigmoid(margin[i]);
      coef[i] = cost_ * y_[i] * (s - 1.0);
      if (curvature) (*curvature)[i] = s * (1.0 - s);
    }
    grad_w = w + x_.transpose() * coef;
    grad_b = coef.sum();
  }

  /// Hessian-vector product given the curvature from gradient().
  void hessian_times(const Vector& curvature, const Vector& v_w, double v_b, Vector& out_w, double& out_b) const {
    Vector t = x_ * v_w;
    t.array() += v_b;
    t.array() *= cost_ * curvature.array();
    out_w = v_w + x_.transpose() * t;
    out_b = t.sum();
  }

  Eigen::Index dim() const noexcept { return x_.cols(); }
  double cost() const noexcept { return cost_; }

 private:
  Vector margins(const Vector& w, double b) const {
    Vector m = x_ * w;
    m.array() += b;
    return (m.array() * y_.array()).matrix();
  }

  const Matrix& x_;
  const Vector& y_;
  double cost_;
};

namespace detail {

inline double joint_norm(const Vector& w, double b) { return std::sqrt(w.squaredNorm() + b * b); }

// Truncated Newton: conjugate gradient on the Newton system, then a
// backtracking Armijo line search so accepted steps never raise f.
inline BinaryModel newton_solve(const Matrix& x, const Vector& y, double cost, const SolverOptions& options,
                                Vector w, double b) {
  const LogisticObjective objective(x, y, cost);
  BinaryModel model;
  SolverStats& stats = model.stats;

  {
    Vector g0_w;
    double g0_b = 0.0;
    objective.gradient(Vector::Zero(x.cols()), 0.0, g0_w, g0_b);
    stats.reference_gradient_norm = joint_norm(g0_w, g0_b);
  }
  const double threshold = options.tolerance * std::max(1.0, stats.reference_gradient_norm);

  double f = objective.value(w, b);
  stats.objective_trace.push_back(f);
  Vector g_w, curvature;
  double g_b = 0.0;
  objective.gradient(w, b, g_w, g_b, &curvature);
  double g_norm = joint_norm(g_w, g_b);

  const int cg_cap = static_cast<int>(std::min<Eigen::Index>(x.cols() + 1, 500));
  while (g_norm > threshold && stats.iterations < options.max_iterations) {
    // Solve H s = -g approximately.
    Vector s_w = Vector::Zero(x.cols());
    double s_b = 0.0;
    Vector r_w = -g_w;
    double r_b = -g_b;
    Vector d_w = r_w;
    double d_b = r_b;
    double rr = r_w.squaredNorm() + r_b * r_b;
    const double cg_tol = 0.1 * g_norm;
    Vector hd_w;
    double hd_b = 0.0;
    for (int k = 0; k < cg_cap && std::sqrt(rr) > cg_tol; ++k) {
      objective.hessian_times(curvature, d_w, d_b, hd_w, hd_b);
      const double dhd = d_w.dot(hd_w) + d_b * hd_b;
      if (!(dhd > 0.0)) break;
      const double alpha = rr / dhd;
      s_w += alpha * d_w;
      s_b += alpha * d_b;
      r_w -= alpha * hd_w;
      r_b -= alpha * hd_b;
      const double rr_next = r_w.squaredNorm() + r_b * r_b;
      const double beta = rr_next / rr;
      d_w = r_w + beta * d_w;
      d_b = r_b + beta * d_b;
      rr = rr_next;
    }
    double slope = g_w.dot(s_w) + g_b * s_b;
    if (!(slope < 0.0)) {
      s_w = -g_w;
      s_b = -g_b;
      slope = -g_norm * g_norm;
    }

    double step = 1.0;
    bool accepted = false;
    Vector w_next;
    double b_next = 0.0, f_next = 0.0;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      w_next = w + step * s_w;
      b_next = b + step * s_b;
      f_next = objective.value(w_next, b_next);
      if (f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++stats.iterations;
    w = std::move(w_next);
    b = b_next;
    f = f_next;
    stats.objective_trace.push_back(f);
    objective.gradient(w, b, g_w, g_b, &curvature);
    g_norm = joint_norm(g_w, g_b);
  }

  stats.objective = f;
  stats.gradient_norm = g_norm;
  stats.converged = g_norm <= threshold;
  model.weights = std::move(w);
  model.bias = b;
  return model;
}

}  // namespace detail

/// When there are more features than samples the optimum lies in the row
/// space of X, so the problem is solved exactly in coordinates of an
/// orthonormal basis of that space. `transform` maps reduced weights back
/// (w = transform * z) and projects new rows (x_reduced = x * transform).
struct RowSpaceBasis {
  Matrix transform;  // D x r
  Matrix reduced;    // N x r
};

inline std::optional<RowSpaceBasis> row_space_basis(const Matrix& x) {
  if (x.cols() <= x.rows()) return std::nullopt;
  const Matrix gram = x * x.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(gram), Eigen::ComputeEigenvectors);
  const Vector& lambda = eig.eigenvalues();
  const double top = lambda.size() ? lambda.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = lambda.size() - 1; i >= 0; --i) {
    if (lambda[i] > 1e-12 * top && lambda[i] > 0.0) keep.push_back(i);
  }
  RowSpaceBasis basis;
  const auto n = x.rows();
  const auto r = static_cast<Eigen::Index>(keep.size());
  Matrix u_scaled(n, r);
  basis.reduced.resize(n, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double root = std::sqrt(lambda[keep[static_cast<std::size_t>(j)]]);
    const auto col = eig.eigenvectors().col(keep[static_cast<std::size_t>(j)]);
    u_scaled.col(j) = col / root;
    basis.reduced.col(j) = col * root;
  }
  basis.transform = x.transpose() * u_scaled;
  return basis;
}

namespace detail {

inline void check_binary_inputs(const Matrix& x, std::span<const int> y, double cost) {
  if (!(cost > 0.0) || !std::isfinite(cost)) throw ConfigError("cost parameter C must be positive and finite");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ShapeError("feature rows and labels differ in count");
  if (x.rows() < 2) throw DataError("binary training needs at least two samples");
  if (!x.allFinite()) throw DataError("features contain non-finite values");
  bool pos = false, neg = false;
  for (int label : y) {
    if (label == 1) pos = true;
    else if (label == -1) neg = true;
    else throw DataError("binary labels must be +1 or -1");
  }
  if (!pos || !neg) throw DataError("binary training needs both classes present");
}

inline Vector to_vector(std::span<const int> y) {
  Vector out(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[i];
  return out;
}

}  // namespace detail

/// L2-regularized logistic regression for labels in {-1, +1}.
inline BinaryModel train_binary(const Matrix& x, std::span<const int> y, double cost,
                                const SolverOptions& options = {}) {
  detail::check_binary_inputs(x, y, cost);
  const Vector labels = detail::to_vector(y);
  if (auto basis = row_space_basis(x)) {
    BinaryModel reduced = detail::newton_solve(basis->reduced, labels, cost, options,
                                               Vector::Zero(basis->reduced.cols()), 0.0);
    reduced.weights = basis->transform * reduced.weights;
    return reduced;
  }
  return detail::newton_solve(x, labels, cost, options, Vector::Zero(x.cols()), 0.0);
}

/// One-vs-rest multiclass model; predict() takes the argmax decision value
/// with ties going to the smallest class id.
struct LinearModel {
  std::size_t classes = 0;
  std::size_t dim = 0;
  int best_c = 1;
  Matrix weights;  // classes x dim
  Vector bias;     // classes

  Vector decision_values(std::span<const double> x) const {
    if (x.size() != dim) {
      throw ShapeError("model expects " + std::to_string(dim) + " features, got " + std::to_string(x.size()));
    }
    const Eigen::Map<const Vector> row(x.data(), static_cast<Eigen::Index>(x.size()));
    return weights * row + bias;
  }

  std::size_t predict(std::span<const double> x) const {
    const Vector scores = decision_values(x);
    std::size_t best = 0;
    for (Eigen::Index k = 1; k < scores.size(); ++k) {
      if (scores[k] > scores[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(k);
    }
    return best;
  }

  friend bool operator==(const LinearModel& a, const LinearModel& b) {
    return a.classes == b.classes && a.dim == b.dim && a.best_c == b.best_c && a.weights == b.weights &&
           a.bias == b.bias;
  }
};

namespace detail {

inline std::size_t check_multiclass(const Matrix& x, std::span<const int> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ShapeError("feature rows and labels differ in count");
  if (!x.allFinite()) throw DataError("features contain non-finite values");
  int top = -1;
  for (int label : labels) {
    if (label < 0) throw DataError("class ids must be non-negative");
    top = std::max(top, label);
  }
  const std::size_t classes = static_cast<std::size_t>(top + 1);
  if (classes < 2) throw DataError("one-vs-rest training needs at least two classes");
  std::vector<std::size_t> counts(classes, 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  for (std::size_t k = 0; k < classes; ++k) {
    if (counts[k] == 0) throw DataError("class " + std::to_string(k) + " has no samples");
  }
  return classes;
}

inline std::vector<int> one_vs_rest_labels(std::span<const int> labels, int positive) {
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == positive ? 1 : -1;
  return y;
}

}  // namespace detail

/// One binary model per class (class k vs the rest). Class ids are 0..K-1.
inline LinearModel train_ovr(const Matrix& x, std::span<const int> labels, double cost,
                             const SolverOptions& options = {}, unsigned threads = 1) {
  const std::size_t classes = detail::check_multiclass(x, labels);
  if (!(cost > 0.0)) throw ConfigError("cost parameter C must be positive");
  const auto basis = row_space_basis(x);
  const Matrix& design = basis ? basis->reduced : x;

  std::vector<BinaryModel> models(classes);
  parallel_for(classes, threads, [&](std::size_t k) {
    const Vector y = detail::to_vector(detail::one_vs_rest_labels(labels, static_cast<int>(k)));
    models[k] = detail::newton_solve(design, y, cost, options, Vector::Zero(design.cols()), 0.0);
  });

  LinearModel model;
  model.classes = classes;
  model.dim = static_cast<std::size_t>(x.cols());
  model.best_c = static_cast<int>(std::lround(cost));
  model.weights.resize(static_cast<Eigen::Index>(classes), x.cols());
  model.bias.resize(static_cast<Eigen::Index>(classes));
  for (std::size_t k = 0; k < classes; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    model.weights.row(row) = basis ? Vector(basis->transform * models[k].weights).transpose()
                                   : models[k].weights.transpose();
    model.bias[row] = models[k].bias;
  }
  return model;
}

/// Fraction of rows whose predicted class equals the label.
inline double evaluate(const LinearModel& model, const Matrix& x, std::span<const int> labels) {
  if (static_cast<std::size_t>(x.cols()) != model.dim) {
    throw ShapeError("model expects " + std::to_string(model.dim) + " features, test set has " +
                     std::to_string(x.cols()));
  }
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ShapeError("test rows and labels differ in count");
  if (labels.empty()) throw DataError("empty test set");
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector row = x.row(i).transpose();
    correct += model.predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))) ==
               static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

// --- Grid search over C -------------------------------------------------------

struct GridOptions {
  int folds = 5;
  int c_min = 1;
  int c_max = 100;
  std::uint64_t seed = 0;
  SolverOptions solver;
  unsigned threads = 1;
};

struct GridSearchReport {
  std::vector<int> c_values;
  std::vector<double> mean_accuracy;  // parallel to c_values
  int best_c = 0;
  int folds = 0;

  friend bool operator==(const GridSearchReport&, const GridSearchReport&) = default;
};

/// Stratified fold assignment: each class's samples are shuffled with a
/// stream seeded by (seed, class) and dealt round-robin into folds.
inline std::vector<int> stratified_folds(std::span<const int> labels, std::size_t classes, int folds,
                                         std::uint64_t seed) {
  std::vector<int> fold_of(labels.size(), 0);
  for (std::size_t k = 0; k < classes; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == static_cast<int>(k)) members.push_back(i);
    }
    SplitMix64 rng(mix_seed(seed, 0xF01D, k));
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    for (std::size_t j = 0; j < members.size(); ++j) fold_of[members[j]] = static_cast<int>(j % folds);
  }
  return fold_of;
}

/// Picks C from [c_min, c_max] by stratified k-fold cross-validation on the
/// given (training-only) data. Ties go to the smallest C. For each fold and
/// class the C values are solved in increasing order, each warm-started
/// from the previous solution.
inline GridSearchReport grid_search_c(const Matrix& x, std::span<const int> labels, const GridOptions& options = {}) {
  const std::size_t classes = detail::check_multiclass(x, labels);
  if (options.folds < 2) throw ConfigError("grid search needs at least 2 folds");
  if (options.c_min < 1 || options.c_max < options.c_min) throw ConfigError("invalid C range");
  {
    std::vector<std::size_t> counts(classes, 0);
    for (int label : labels) ++counts[static_cast<std::size_t>(label)];
    for (std::size_t k = 0; k < classes; ++k) {
      if (counts[k] < static_cast<std::size_t>(options.folds)) {
        throw DataError("class " + std::to_string(k) + " has " + std::to_string(counts[k]) +
                        " samples, fewer than the " + std::to_string(options.folds) + " folds");
      }
    }
  }

  const int folds = options.folds;
  const std::size_t grid = static_cast<std::size_t>(options.c_max - options.c_min + 1);
  const auto fold_of = stratified_folds(labels, classes, folds, options.seed);

  struct FoldData {
    Matrix train, valid;
    std::vector<int> train_labels, valid_labels;
  };
  std::vector<FoldData> data(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    FoldData& d = data[static_cast<std::size_t>(f)];
    std::vector<Eigen::Index> tr, va;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (fold_of[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
      (fold_of[i] == f ? d.valid_labels : d.train_labels).push_back(labels[i]);
    }
    d.train = x(tr, Eigen::all);
    d.valid = x(va, Eigen::all);
    if (auto basis = row_space_basis(d.train)) {
      d.valid = d.valid * basis->transform;
      d.train = std::move(basis->reduced);
    }
  }

  // scores[fold][class] is a (grid x n_valid) table of decision values.
  std::vector<std::vector<Matrix>> scores(static_cast<std::size_t>(folds), std::vector<Matrix>(classes));
  parallel_for(static_cast<std::size_t>(folds) * classes, options.threads, [&](std::size_t job) {
    const std::size_t f = job / classes;
    const std::size_t k = job % classes;
    const FoldData& d = data[f];
    const Vector y = detail::to_vector(detail::one_vs_rest_labels(d.train_labels, static_cast<int>(k)));
    Matrix& table = scores[f][k];
    table.resize(static_cast<Eigen::Index>(grid), d.valid.rows());
    Vector w = Vector::Zero(d.train.cols());
    double b = 0.0;
    for (std::size_t g = 0; g < grid; ++g) {
      const double cost = options.c_min + static_cast<int>(g);
      BinaryModel m = detail::newton_solve(d.train, y, cost, options.solver, w, b);
      Vector s = d.valid * m.weights;
      s.array() += m.bias;
      table.row(static_cast<Eigen::Index>(g)) = s.transpose();
      w = std::move(m.weights);
      b = m.bias;
    }
  });

  GridSearchReport report;
  report.folds = folds;
  double best = -1.0;
  for (std::size_t g = 0; g < grid; ++g) {
    double acc_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      const FoldData& d = data[static_cast<std::size_t>(f)];
      std::size_t correct = 0;
      for (std::size_t i = 0; i < d.valid_labels.size(); ++i) {
        std::size_t arg = 0;
        double top = scores[static_cast<std::size_t>(f)][0](static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(i));
        for (std::size_t k = 1; k < classes; ++k) {
          const double v = scores[static_cast<std::size_t>(f)][k](static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(i));
          if (v > top) {
            top = v;
            arg = k;
          }
        }
        correct += arg == static_cast<std::size_t>(d.valid_labels[i]);
      }
      acc_sum += static_cast<double>(correct) / static_cast<double>(d.valid_labels.size());
    }
    const double mean = acc_sum / folds;
    const int c = options.c_min + static_cast<int>(g);
    report.c_values.push_back(c);
    report.mean_accuracy.push_back(mean);
    if (mean > best) {
      best = mean;
      report.best_c = c;
    }
  }
  return report;
}

}  // namespace hdf
