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

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "symsgd/combiner.hpp"
#include "symsgd/core.hpp"
#include "symsgd/learners.hpp"

namespace symsgd {

enum class Algorithm { Sequential, Hogwild, MrSymSgd, AsyncSymSgd };
std::string_view to_string(Algorithm a) noexcept;
// "seq", "hogwild", "mr-symsgd", "async-symsgd".
Algorithm parse_algorithm(std::string_view name);

struct ParallelConfig {
  std::size_t threads = 1;
  std::size_t block_size = 256;  // examples per block per worker
  std::size_t k = 15;            // projection dimension
  std::size_t passes = 1;
  std::uint64_t seed = 1;
  std::size_t freq_sample = 1000;
  double freq_threshold = 0.10;  // values > 1 leave the frequent set empty
  // Debug: A = I with k = f, which makes combination exact to first order.
  bool exact_combiner = false;
  ProjectionKind projection = ProjectionKind::Sparse;
  // Keep one projection per worker for the whole run. Only honoured for OLS,
  // whose combiner does not depend on the model.
  bool reuse_projection = false;
};

// Throws InvalidArgument on zero threads/block/k/passes/freq_sample or a
// non-positive freq_threshold.
void validate(const ParallelConfig& cfg);

struct TrainReport {
  DenseVector final_model;
  std::vector<double> pass_seconds;
  std::vector<double> pass_loss;
  std::vector<double> pass_auc;  // NaN for regression learners
  std::size_t examples_processed = 0;
  std::size_t frequent_features = 0;  // coordinates handled by combiners
};

// Seeded Fisher-Yates permutation for one pass; shared by every driver so all
// algorithms see identical example streams.
std::vector<std::uint32_t> pass_order(std::size_t n, std::uint64_t seed, std::size_t pass);

// Plain SGD over a per-pass shuffle. `eval`, when given, is scored instead of
// the training set at each pass boundary.
TrainReport train_sequential(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                             const ParallelConfig& cfg, const Dataset* eval = nullptr);

// Map-reduce SymSGD. Each super-step hands P consecutive blocks of the pass
// order to the P workers, all starting from the global model w_g. Each worker
// returns its local model and a projected combiner; the reducer folds
//   w_1 = local_1,  w_i = local_i + S_i dw + U_i A_i^T dw,  dw = w_{i-1} - w_g
// in worker order and w_P becomes the next w_g. The final block of a pass may
// be short and the final super-step may use fewer than P workers.
TrainReport train_mr_symsgd(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                            const ParallelConfig& cfg, const Dataset* eval = nullptr);

// Features present in at least freq_threshold of a seeded sample of
// min(freq_sample, n) examples, ascending.
std::vector<FeatureIndex> detect_frequent_features(const Dataset& d, const ParallelConfig& cfg);

struct FeaturePartition {
  std::vector<FeatureIndex> frequent;
  std::vector<FeatureIndex> infrequent;
};
// Splits [0, num_features) around a frequent set; throws InvalidArgument on
// unsorted, repeated or out-of-range entries.
FeaturePartition partition_features(std::size_t num_features,
                                    const std::vector<FeatureIndex>& frequent);

// Hybrid SymSGD: frequent coordinates follow the map-reduce schedule with
// combiners restricted to the frequent subspace; infrequent coordinates are
// written racily into a shared model as each example is processed. Workers
// compute x.w from their block-local frequent copy plus the live shared
// infrequent coordinates.
TrainReport train_async_symsgd(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                               const ParallelConfig& cfg, const Dataset* eval = nullptr);
// Same with an explicit frequent set instead of detection.
TrainReport train_hybrid_symsgd(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                                const ParallelConfig& cfg,
                                const std::vector<FeatureIndex>& frequent,
                                const Dataset* eval = nullptr);

// Lock-free baseline: worker t streams the t-th contiguous shard of each pass
// order against one shared model.
TrainReport train_hogwild(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                          const ParallelConfig& cfg, const Dataset* eval = nullptr);

TrainReport train(Algorithm algo, const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                  const ParallelConfig& cfg, const Dataset* eval = nullptr);

}  // namespace symsgd
