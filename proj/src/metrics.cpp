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

#include "symsgd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "symsgd/error.hpp"

namespace symsgd {

double auc(std::span<const ScoredLabel> pairs) {
  std::vector<ScoredLabel> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  double positives = 0.0;
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    double tied_pos = 0.0;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      if (sorted[j].positive) tied_pos += 1.0;
      ++j;
    }
    // 1-based ranks i+1 .. j share their mean.
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += tied_pos * mean_rank;
    positives += tied_pos;
    i = j;
  }
  const double negatives = static_cast<double>(sorted.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw UndefinedMetric("AUC needs at least one positive and one negative label");
  }
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double auc(const Dataset& d, std::span<const double> w) {
  std::vector<ScoredLabel> pairs;
  pairs.reserve(d.num_examples());
  for (const Example& z : d.examples()) pairs.push_back({dot(z.features, w), z.label > 0.0});
  return auc(pairs);
}

double loss(const Dataset& d, std::span<const double> w, LearnerKind kind, const Hyperparams& hp) {
  if (d.empty()) throw InvalidInput("loss of an empty dataset is undefined");
  if (d.num_features() > w.size()) throw DimensionMismatch("model shorter than the feature space");
  double total = 0.0;
  for (const Example& z : d.examples()) {
    const double m = dot(z.features, w);
    const double y = z.label;
    switch (kind) {
      case LearnerKind::OLS:
      case LearnerKind::Lasso:
        total += 0.5 * (m - y) * (m - y);
        break;
      case LearnerKind::Logistic:
        // log(1 + e^m) - y m, evaluated without overflow.
        total += (m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m))) - y * m;
        break;
      case LearnerKind::Perceptron:
      case LearnerKind::SVM:
        total += std::max(0.0, 1.0 - y * m);
        break;
    }
  }
  double mean = total / static_cast<double>(d.num_examples());
  if (kind == LearnerKind::SVM) {
    double sq = 0.0;
    for (double e : w) sq += e * e;
    mean += 0.5 * hp.lambda * sq;
  } else if (kind == LearnerKind::Lasso) {
    double l1 = 0.0;
    for (double e : w) l1 += std::abs(e);
    mean += hp.lambda * l1;
  }
  return mean;
}

}  // namespace symsgd
