// Copyright 2026 The symsgd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "symsgd/core.hpp"

namespace symsgd {

enum class LearnerKind { OLS, Logistic, Perceptron, SVM, Lasso };

std::string_view to_string(LearnerKind kind) noexcept;
// Accepts "ols", "logistic", "perceptron", "svm", "lasso" (case-insensitive).
LearnerKind parse_learner(std::string_view name);

// Logistic, Perceptron and SVM are scored with AUC; OLS and Lasso are not.
bool is_classifier(LearnerKind kind) noexcept;

struct Hyperparams {
  double alpha = 0.01;   // constant learning rate
  double lambda = 0.0;   // regularization; SVM and Lasso only
};

// Throws InvalidArgument on alpha < 0, lambda < 0, or SVM with lambda == 0.
void validate(LearnerKind kind, const Hyperparams& hp);

// Logistic expects {0,1}, Perceptron and SVM expect {-1,+1}, OLS and Lasso any
// finite real. Throws InvalidLabel otherwise.
void validate_label(LearnerKind kind, double y);
void validate_labels(LearnerKind kind, const Dataset& d);

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// The action of the per-example Jacobian M_z on a vector.
//   Identity        M = I                              (Perceptron)
//   UniformScale    M = c I                            (SVM, c = 1 - alpha lambda)
//   RankOne         M = I - s x x^T                    (OLS s = alpha, Logistic s = alpha sigma'(x.w))
//   LassoRow        M_ij = [i alive] (delta_ij - alpha x_i x_j)
// `x` does not own its storage; it views the example the action came from.
struct CombinerAction {
  enum class Kind { Identity, UniformScale, RankOne, LassoRow };

  Kind kind = Kind::Identity;
  double scale = 1.0;  // c for UniformScale, s for RankOne, alpha for LassoRow
  SparseView x;
  // LassoRow: coordinates whose post-step magnitude was clipped to zero,
  // ascending. Every other coordinate is alive.
  std::vector<FeatureIndex> dropped;
};

// Returns the model after one SGD step on z. `w` is not modified.
DenseVector sgd_step(LearnerKind kind, std::span<const double> w, const Example& z,
                     const Hyperparams& hp);

// Jacobian action of the step on z evaluated at the pre-step model w_pre.
CombinerAction combiner_action(LearnerKind kind, std::span<const double> w_pre, const Example& z,
                               const Hyperparams& hp);

// Returns M_z v.
DenseVector apply_action(const CombinerAction& a, std::span<const double> v);

// ---------------------------------------------------------------------------
// Step kernel shared by every driver. A Model provides
//   double dot(const Row&)            x . w
//   void axpy(double c, const Row&)   w += c x
//   void scale(double c)              w *= c on every coordinate
//   void lasso_sweep(const Row&, F, std::vector<FeatureIndex>*)
//       w_i = F(w_i, x_i).value on every coordinate, recording the combiner
//       coordinates where F reports !alive
// so that the same update rule runs on a private dense model, on a shared
// racy model, or on a split frequent/infrequent model.

struct LassoCoordinate {
  double value;
  bool alive;
};

// One coordinate of the truncated Lasso step with residual r = y - x.w.
// The active sign is sign(w_i), or the sign of the gradient step when w_i = 0.
inline LassoCoordinate lasso_coordinate(double wi, double xi, double residual,
                                        const Hyperparams& hp) noexcept {
  const double g = hp.alpha * residual * xi;
  const double s = wi > 0.0 ? 1.0 : (wi < 0.0 ? -1.0 : (g < 0.0 ? -1.0 : 1.0));
  const double u = s * wi + s * g - hp.alpha * hp.lambda;
  if (u > 0.0) return {s * u, true};
  return {0.0, false};
}

struct StepOutcome {
  CombinerAction::Kind kind;
  double scale;
};

template <class Model, class Row>
StepOutcome sgd_update(LearnerKind kind, Model& w, const Row& x, double y, const Hyperparams& hp,
                       std::vector<FeatureIndex>* dropped) {
  using K = CombinerAction::Kind;
  const double margin = w.dot(x);
  switch (kind) {
    case LearnerKind::OLS:
      w.axpy(-hp.alpha * (margin - y), x);
      return {K::RankOne, hp.alpha};
    case LearnerKind::Logistic: {
      const double p = sigmoid(margin);
      w.axpy(-hp.alpha * (p - y), x);
      return {K::RankOne, hp.alpha * p * (1.0 - p)};
    }
    case LearnerKind::Perceptron:
      if (y * margin <= 0.0) w.axpy(hp.alpha * y, x);
      return {K::Identity, 1.0};
    case LearnerKind::SVM: {
      const double c = 1.0 - hp.alpha * hp.lambda;
      w.scale(c);
      if (y * margin < 1.0) w.axpy(hp.alpha * y, x);
      return {K::UniformScale, c};
    }
    case LearnerKind::Lasso: {
      const double r = y - margin;
      if (dropped) dropped->clear();
      w.lasso_sweep(
          x, [&](double wi, double xi) { return lasso_coordinate(wi, xi, r, hp); }, dropped);
      return {K::LassoRow, hp.alpha};
    }
  }
  return {K::Identity, 1.0};
}

// Private dense model.
struct DenseModel {
  std::span<double> w;

  double dot(SparseView x) const noexcept { return dot_unchecked(x, w.data()); }
  void axpy(double c, SparseView x) noexcept { saxpy_unchecked(w.data(), c, x); }
  void scale(double c) noexcept {
    for (double& e : w) e *= c;
  }
  template <class F>
  void lasso_sweep(SparseView x, F&& f, std::vector<FeatureIndex>* dropped) {
    std::size_t p = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double xi = 0.0;
      if (p < x.indices.size() && x.indices[p] == i) xi = x.values[p++];
      const LassoCoordinate c = f(w[i], xi);
      w[i] = c.value;
      if (!c.alive && dropped) dropped->push_back(static_cast<FeatureIndex>(i));
    }
  }
};

// Shared model written without locks. Each coordinate load and store is
// indivisible; read-modify-write sequences from different threads may
// interleave and lose updates.
struct RacyModel {
  std::span<double> w;

  static double load(double& e) noexcept {
    return std::atomic_ref<double>(e).load(std::memory_order_relaxed);
  }
  static void store(double& e, double v) noexcept {
    std::atomic_ref<double>(e).store(v, std::memory_order_relaxed);
  }

  double dot(SparseView x) const noexcept {
    double s = 0.0;
    for (std::size_t p = 0; p < x.indices.size(); ++p) s += x.values[p] * load(w[x.indices[p]]);
    return s;
  }
  void axpy(double c, SparseView x) noexcept {
    for (std::size_t p = 0; p < x.indices.size(); ++p) {
      double& e = w[x.indices[p]];
      store(e, load(e) + c * x.values[p]);
    }
  }
  void scale(double c) noexcept {
    for (double& e : w) store(e, load(e) * c);
  }
  template <class F>
  void lasso_sweep(SparseView x, F&& f, std::vector<FeatureIndex>* dropped) {
    std::size_t p = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double xi = 0.0;
      if (p < x.indices.size() && x.indices[p] == i) xi = x.values[p++];
      const LassoCoordinate c = f(load(w[i]), xi);
      store(w[i], c.value);
      if (!c.alive && dropped) dropped->push_back(static_cast<FeatureIndex>(i));
    }
  }
};

}  // namespace symsgd
