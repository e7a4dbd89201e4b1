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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "symsgd/core.hpp"

namespace symsgd {

struct ParseOptions {
  // Overrides the inferred feature count (max index seen) so that train and
  // test files share a dimensionality.
  std::optional<std::size_t> num_features;
};

// LibSVM text: "<label> <idx>:<val> ..." with 1-based indices, '#' comments.
// Indices are stored 0-based. Throws ParseError (with line number) on
// malformed tokens or repeated indices and InvalidInput on an empty input.
Dataset parse_libsvm(std::istream& in, const ParseOptions& opts = {});
// Reads a file; names ending in ".gz" are decompressed.
Dataset load_libsvm(const std::filesystem::path& path, const ParseOptions& opts = {});

// Inverse of parse_libsvm; values are written with round-trip precision.
void write_libsvm(std::ostream& out, const Dataset& d);
void save_libsvm(const std::filesystem::path& path, const Dataset& d);

enum class TaskKind { Regression, Classification };

struct SyntheticSpec {
  std::size_t num_features = 100;
  std::size_t num_examples = 1000;
  double density = 0.1;  // probability that a feature is present, in (0, 1]
  double noise_sd = 0.0;
  std::uint64_t seed = 1;
  TaskKind task = TaskKind::Regression;
  bool normalize = false;  // scale each example to unit L2 norm
  // The first `hot_features` features appear with probability `hot_density`
  // instead of `density`; used to plant frequent features.
  std::size_t hot_features = 0;
  double hot_density = 0.5;
};

struct SyntheticData {
  Dataset data;
  DenseVector true_model;
};

// Hidden model w* ~ N(0, I); feature values ~ N(0, 1). Regression labels are
// x.w* + noise, classification labels are [x.w* + noise > 0] in {0, 1}.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

enum class LabelConvention { None, ZeroOne, PlusMinus };
LabelConvention parse_label_convention(std::string_view name);
// ZeroOne maps y > 0 to 1 and everything else to 0; PlusMinus maps to +1/-1.
Dataset convert_labels(Dataset d, LabelConvention convention);

// Divides every feature by its largest absolute value over the dataset.
Dataset max_abs_scaled(const Dataset& d);

// First `n_first` examples and the rest, sharing num_features.
std::pair<Dataset, Dataset> split_dataset(const Dataset& d, std::size_t n_first);

struct DatasetStats {
  std::size_t num_features = 0;
  std::size_t num_examples = 0;
  double avg_nnz = 0.0;
  // Mean over examples of (#frequent nonzeros / #nonzeros); examples with no
  // nonzeros are skipped.
  double avg_nfnz_ratio = 0.0;
};

// `frequent` must be sorted ascending.
DatasetStats dataset_stats(const Dataset& d, std::span<const FeatureIndex> frequent);

}  // namespace symsgd
