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
#include <span>
#include <utility>
#include <vector>

namespace symsgd {

using FeatureIndex = std::uint32_t;
using DenseVector = std::vector<double>;

// Non-owning view of a sparse vector in canonical form. Valid while the
// owning SparseVector (or remapped buffer) is alive.
struct SparseView {
  std::span<const FeatureIndex> indices;
  std::span<const double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }
  // One past the largest stored index, 0 when empty.
  std::size_t extent() const noexcept {
    return indices.empty() ? 0 : static_cast<std::size_t>(indices.back()) + 1;
  }
};

// Sparse vector with strictly increasing indices and no stored zeros.
class SparseVector {
 public:
  SparseVector() = default;

  // Sorts by index and drops exact zeros. Duplicate indices throw
  // InvalidArgument.
  explicit SparseVector(std::vector<std::pair<FeatureIndex, double>> entries);
  SparseVector(std::initializer_list<std::pair<FeatureIndex, double>> entries);

  static SparseVector from_dense(std::span<const double> dense);

  std::size_t nnz() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  std::span<const FeatureIndex> indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }
  SparseView view() const noexcept { return {indices_, values_}; }
  std::size_t extent() const noexcept { return view().extent(); }

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<FeatureIndex> indices_;
  std::vector<double> values_;
};

struct Example {
  SparseVector features;
  double label = 0.0;

  bool operator==(const Example&) const = default;
};

// Ordered examples over a fixed feature space [0, num_features).
class Dataset {
 public:
  Dataset() = default;
  // Throws DimensionMismatch when an example indexes past num_features.
  Dataset(std::vector<Example> examples, std::size_t num_features);

  std::size_t num_features() const noexcept { return num_features_; }
  std::size_t num_examples() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }

  std::span<const Example> examples() const noexcept { return examples_; }
  const Example& operator[](std::size_t i) const { return examples_[i]; }

  void set_label(std::size_t i, double y) { examples_.at(i).label = y; }

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Example> examples_;
  std::size_t num_features_ = 0;
};

// x . w over stored entries of x. Throws DimensionMismatch if x indexes past w.
double dot(SparseView x, std::span<const double> w);
inline double dot(const SparseVector& x, std::span<const double> w) {
  return dot(x.view(), w);
}

// Returns w + c * x.
DenseVector saxpy(const DenseVector& w, double c, const SparseVector& x);
// w += c * x in place.
void saxpy_inplace(std::span<double> w, double c, SparseView x);

// Unchecked hot-path kernels; callers guarantee x.extent() <= w.size().
inline double dot_unchecked(SparseView x, const double* w) noexcept {
  double s = 0.0;
  for (std::size_t p = 0; p < x.indices.size(); ++p) s += x.values[p] * w[x.indices[p]];
  return s;
}
inline void saxpy_unchecked(double* w, double c, SparseView x) noexcept {
  for (std::size_t p = 0; p < x.indices.size(); ++p) w[x.indices[p]] += c * x.values[p];
}

double norm2(std::span<const double> v);

// Small dense row-major matrix used by the explicit-combiner oracles and the
// spectral analysis. Not meant for production-scale f.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  DenseVector multiply(std::span<const double> v) const;
  Matrix multiply(const Matrix& other) const;
  Matrix transpose() const;
  Matrix minus_identity() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace symsgd
