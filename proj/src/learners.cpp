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

#include "symsgd/learners.hpp"

#include <algorithm>
#include <cctype>

#include "symsgd/error.hpp"

namespace symsgd {

std::string_view to_string(LearnerKind kind) noexcept {
  switch (kind) {
    case LearnerKind::OLS: return "ols";
    case LearnerKind::Logistic: return "logistic";
    case LearnerKind::Perceptron: return "perceptron";
    case LearnerKind::SVM: return "svm";
    case LearnerKind::Lasso: return "lasso";
  }
  return "unknown";
}

LearnerKind parse_learner(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ols" || lower == "linear") return LearnerKind::OLS;
  if (lower == "logistic") return LearnerKind::Logistic;
  if (lower == "perceptron") return LearnerKind::Perceptron;
  if (lower == "svm") return LearnerKind::SVM;
  if (lower == "lasso") return LearnerKind::Lasso;
  throw InvalidArgument("unknown learner '" + std::string(name) + "'");
}

bool is_classifier(LearnerKind kind) noexcept {
  return kind == LearnerKind::Logistic || kind == LearnerKind::Perceptron ||
         kind == LearnerKind::SVM;
}

void validate(LearnerKind kind, const Hyperparams& hp) {
  if (!(hp.alpha >= 0.0) || !std::isfinite(hp.alpha)) {
    throw InvalidArgument("learning rate must be finite and non-negative");
  }
  if (!(hp.lambda >= 0.0) || !std::isfinite(hp.lambda)) {
    throw InvalidArgument("lambda must be finite and non-negative");
  }
  if (kind == LearnerKind::SVM && hp.lambda == 0.0) {
    throw InvalidArgument("svm requires lambda > 0");
  }
}

void validate_label(LearnerKind kind, double y) {
  switch (kind) {
    case LearnerKind::Logistic:
      if (y != 0.0 && y != 1.0) {
        throw InvalidLabel("logistic labels must be 0 or 1, got " + std::to_string(y));
      }
      return;
    case LearnerKind::Perceptron:
    case LearnerKind::SVM:
      if (y != -1.0 && y != 1.0) {
        throw InvalidLabel(std::string(to_string(kind)) + " labels must be -1 or +1, got " +
                           std::to_string(y));
      }
      return;
    case LearnerKind::OLS:
    case LearnerKind::Lasso:
      if (!std::isfinite(y)) throw InvalidLabel("regression label is not finite");
      return;
  }
}

void validate_labels(LearnerKind kind, const Dataset& d) {
  for (const Example& z : d.examples()) validate_label(kind, z.label);
}

namespace {
void check_step_inputs(LearnerKind kind, std::span<const double> w, const Example& z,
                       const Hyperparams& hp) {
  validate(kind, hp);
  validate_label(kind, z.label);
  if (z.features.extent() > w.size()) {
    throw DimensionMismatch("example indexes past the model dimension");
  }
}
}  // namespace

DenseVector sgd_step(LearnerKind kind, std::span<const double> w, const Example& z,
                     const Hyperparams& hp) {
  check_step_inputs(kind, w, z, hp);
  DenseVector out(w.begin(), w.end());
  DenseModel model{out};
  sgd_update(kind, model, z.features.view(), z.label, hp, nullptr);
  return out;
}

CombinerAction combiner_action(LearnerKind kind, std::span<const double> w_pre, const Example& z,
                               const Hyperparams& hp) {
  check_step_inputs(kind, w_pre, z, hp);
  DenseVector scratch(w_pre.begin(), w_pre.end());
  DenseModel model{scratch};
  CombinerAction a;
  const StepOutcome o = sgd_update(kind, model, z.features.view(), z.label, hp, &a.dropped);
  a.kind = o.kind;
  a.scale = o.scale;
  if (a.kind == CombinerAction::Kind::RankOne || a.kind == CombinerAction::Kind::LassoRow) {
    a.x = z.features.view();
  }
  return a;
}

DenseVector apply_action(const CombinerAction& a, std::span<const double> v) {
  using K = CombinerAction::Kind;
  if (a.x.extent() > v.size()) throw DimensionMismatch("action indexes past the vector");
  DenseVector out(v.begin(), v.end());
  switch (a.kind) {
    case K::Identity:
      break;
    case K::UniformScale:
      for (double& e : out) e *= a.scale;
      break;
    case K::RankOne:
      saxpy_unchecked(out.data(), -a.scale * dot_unchecked(a.x, v.data()), a.x);
      break;
    case K::LassoRow: {
      saxpy_unchecked(out.data(), -a.scale * dot_unchecked(a.x, v.data()), a.x);
      for (FeatureIndex i : a.dropped) {
        if (i >= out.size()) throw DimensionMismatch("dropped coordinate past the vector");
        out[i] = 0.0;
      }
      break;
    }
  }
  return out;
}

}  // namespace symsgd
