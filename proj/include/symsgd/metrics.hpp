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

#include <span>
#include <vector>

#include "symsgd/core.hpp"
#include "symsgd/learners.hpp"

namespace symsgd {

struct ScoredLabel {
  double score;
  bool positive;
};

// Probability that a random positive outranks a random negative, ties
// counted 1/2. O(m log m). Throws UndefinedMetric unless both classes occur.
double auc(std::span<const ScoredLabel> pairs);

// AUC of scores x . w on d; labels > 0 are positive.
double auc(const Dataset& d, std::span<const double> w);

// Mean per-example cost:
//   OLS          (x.w - y)^2 / 2
//   Logistic     log-loss, y in {0,1}
//   Perceptron   max(0, 1 - y x.w)
//   SVM          max(0, 1 - y x.w) + lambda/2 |w|^2
//   Lasso        (x.w - y)^2 / 2 + lambda |w|_1
// Throws InvalidInput on an empty dataset.
double loss(const Dataset& d, std::span<const double> w, LearnerKind kind, const Hyperparams& hp);

}  // namespace symsgd
