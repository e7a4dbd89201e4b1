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

#include "symsgd/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "symsgd/error.hpp"

namespace symsgd {

SparseVector::SparseVector(std::vector<std::pair<FeatureIndex, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  indices_.reserve(entries.size());
  values_.reserve(entries.size());
  for (std::size_t p = 0; p < entries.size(); ++p) {
    if (p > 0 && entries[p].first == entries[p - 1].first) {
      throw InvalidArgument("duplicate feature index " + std::to_string(entries[p].first));
    }
    if (entries[p].second == 0.0) continue;
    indices_.push_back(entries[p].first);
    values_.push_back(entries[p].second);
  }
}

SparseVector::SparseVector(std::initializer_list<std::pair<FeatureIndex, double>> entries)
    : SparseVector(std::vector<std::pair<FeatureIndex, double>>(entries)) {}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  std::vector<std::pair<FeatureIndex, double>> entries;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) entries.emplace_back(static_cast<FeatureIndex>(i), dense[i]);
  }
  return SparseVector(std::move(entries));
}

Dataset::Dataset(std::vector<Example> examples, std::size_t num_features)
    : examples_(std::move(examples)), num_features_(num_features) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    if (examples_[i].features.extent() > num_features_) {
      throw DimensionMismatch("example " + std::to_string(i) + " indexes feature " +
                              std::to_string(examples_[i].features.extent() - 1) +
                              " but the dataset has " + std::to_string(num_features_) +
                              " features");
    }
  }
}

namespace {
void check_extent(SparseView x, std::size_t n) {
  if (x.extent() > n) {
    throw DimensionMismatch("sparse index " + std::to_string(x.extent() - 1) +
                            " out of range for dimension " + std::to_string(n));
  }
}
}  // namespace

double dot(SparseView x, std::span<const double> w) {
  check_extent(x, w.size());
  return dot_unchecked(x, w.data());
}

DenseVector saxpy(const DenseVector& w, double c, const SparseVector& x) {
  DenseVector out = w;
  saxpy_inplace(out, c, x.view());
  return out;
}

void saxpy_inplace(std::span<double> w, double c, SparseView x) {
  check_extent(x, w.size());
  if (c == 0.0) return;
  saxpy_unchecked(w.data(), c, x);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseVector Matrix::multiply(std::span<const double> v) const {
  if (v.size() != cols_) throw DimensionMismatch("matrix-vector size mismatch");
  DenseVector out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = data_.data() + i * cols_;
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += r[j] * v[j];
    out[i] = s;
  }
  return out;
}

Matrix Matrix::multiply(const Matrix& other) const {
  if (other.rows_ != cols_) throw DimensionMismatch("matrix-matrix size mismatch");
  Matrix out(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t l = 0; l < cols_; ++l) {
      const double a = (*this)(i, l);
      if (a == 0.0) continue;
      const double* b = other.data_.data() + l * other.cols_;
      double* o = out.data_.data() + i * other.cols_;
      for (std::size_t j = 0; j < other.cols_; ++j) o[j] += a * b[j];
    }
  }
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::minus_identity() const {
  if (rows_ != cols_) throw DimensionMismatch("minus_identity needs a square matrix");
  Matrix n = *this;
  for (std::size_t i = 0; i < rows_; ++i) n(i, i) -= 1.0;
  return n;
}

}  // namespace symsgd
