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

#include "symsgd/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "symsgd/error.hpp"
#include "symsgd/rng.hpp"

namespace symsgd {

Projection::Projection(std::size_t k, std::uint64_t seed, ProjectionKind kind)
    : k_(k), seed_(seed), kind_(kind) {
  if (k == 0) throw InvalidArgument("projection dimension k must be at least 1");
  magnitude_ = kind == ProjectionKind::Sparse ? std::sqrt(3.0 / static_cast<double>(k))
                                              : 1.0 / std::sqrt(static_cast<double>(k));
}

Projection Projection::identity(std::size_t dim) {
  return Projection(dim, 0, ProjectionKind::Identity);
}

void Projection::fill_row(FeatureIndex feature, std::span<double> out) const {
  if (out.size() != k_) throw DimensionMismatch("projection row buffer has the wrong length");
  switch (kind_) {
    case ProjectionKind::Identity:
      if (feature >= k_) throw DimensionMismatch("identity projection row out of range");
      std::fill(out.begin(), out.end(), 0.0);
      out[feature] = 1.0;
      return;
    case ProjectionKind::Sparse: {
      const std::uint64_t base = derive_seed(seed_, {feature});
      for (std::size_t j = 0; j < k_; ++j) {
        switch (splitmix64(base + j) % 6) {
          case 0: out[j] = magnitude_; break;
          case 1: out[j] = -magnitude_; break;
          default: out[j] = 0.0; break;
        }
      }
      return;
    }
    case ProjectionKind::Gaussian: {
      Rng rng(derive_seed(seed_, {feature}));
      for (std::size_t j = 0; j < k_; ++j) out[j] = rng.normal() * magnitude_;
      return;
    }
  }
}

std::vector<double> Projection::row(FeatureIndex feature) const {
  std::vector<double> r(k_);
  fill_row(feature, r);
  return r;
}

ProjectedCombiner::ProjectedCombiner(std::size_t dim, Projection projection)
    : dim_(dim), projection_(projection), slot_of_(dim, -1), scratch_(2 * projection.k()) {
  if (projection_.kind() == ProjectionKind::Identity && projection_.k() != dim) {
    throw DimensionMismatch("identity projection needs k equal to the model dimension");
  }
}

void ProjectedCombiner::reset(std::uint64_t seed) {
  for (FeatureIndex f : features_) slot_of_[f] = -1;
  features_.clear();
  a_rows_.clear();
  u_rows_.clear();
  alive_.clear();
  scale_ = 1.0;
  absorbed_ = 0;
  projection_.reseed(seed);
}

std::size_t ProjectedCombiner::ensure_slot(FeatureIndex feature) {
  const std::int32_t s = slot_of_[feature];
  if (s >= 0) return static_cast<std::size_t>(s);
  const std::size_t k = projection_.k();
  const std::size_t slot = features_.size();
  slot_of_[feature] = static_cast<std::int32_t>(slot);
  features_.push_back(feature);
  alive_.push_back(1.0);
  a_rows_.resize(a_rows_.size() + k);
  u_rows_.resize(u_rows_.size() + k, 0.0);
  projection_.fill_row(feature, std::span<double>(a_rows_.data() + slot * k, k));
  return slot;
}

// t = x^T (S A + U) over the rows of x, k entries.
void ProjectedCombiner::accumulate_transfer(SparseView x, double* t) const {
  const std::size_t k = projection_.k();
  std::fill(t, t + k, 0.0);
  for (std::size_t p = 0; p < x.nnz(); ++p) {
    const std::size_t slot = static_cast<std::size_t>(slot_of_[x.indices[p]]);
    const double xs = x.values[p] * slot_diagonal(slot);
    const double xv = x.values[p];
    const double* a = a_rows_.data() + slot * k;
    const double* u = u_rows_.data() + slot * k;
    for (std::size_t j = 0; j < k; ++j) t[j] += xs * a[j] + xv * u[j];
  }
}

void ProjectedCombiner::absorb(const CombinerAction& a) {
  using K = CombinerAction::Kind;
  if (a.x.extent() > dim_) throw DimensionMismatch("action indexes past the combiner dimension");
  const std::size_t k = projection_.k();
  ++absorbed_;
  switch (a.kind) {
    case K::Identity:
      return;
    case K::UniformScale:
      scale_ *= a.scale;
      for (double& e : u_rows_) e *= a.scale;
      return;
    case K::RankOne:
    case K::LassoRow: {
      for (FeatureIndex f : a.x.indices) ensure_slot(f);
      double* t = scratch_.data();
      accumulate_transfer(a.x, t);
      for (std::size_t p = 0; p < a.x.nnz(); ++p) {
        const std::size_t slot = static_cast<std::size_t>(slot_of_[a.x.indices[p]]);
        const double c = a.scale * a.x.values[p];
        double* u = u_rows_.data() + slot * k;
        for (std::size_t j = 0; j < k; ++j) u[j] -= c * t[j];
      }
      if (a.kind == K::LassoRow) {
        for (FeatureIndex f : a.dropped) {
          if (f >= dim_) throw DimensionMismatch("dropped coordinate past the combiner dimension");
          const std::size_t slot = ensure_slot(f);
          alive_[slot] = 0.0;
          std::fill_n(u_rows_.data() + slot * k, k, 0.0);
        }
      }
      return;
    }
  }
}

void ProjectedCombiner::combine_into(std::span<double> out, std::span<const double> w_prev,
                                     std::span<const double> w_g) const {
  if (out.size() != dim_ || w_prev.size() != dim_ || w_g.size() != dim_) {
    throw DimensionMismatch("combine inputs must all have the combiner dimension");
  }
  const std::size_t k = projection_.k();
  double* q = scratch_.data();
  double* row = scratch_.data() + k;
  std::fill(q, q + k, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double dw = w_prev[i] - w_g[i];
    if (dw == 0.0) continue;
    any = true;
    const std::int32_t s = slot_of_[i];
    const double* a;
    if (s >= 0) {
      out[i] += slot_diagonal(static_cast<std::size_t>(s)) * dw;
      a = a_rows_.data() + static_cast<std::size_t>(s) * k;
    } else {
      out[i] += scale_ * dw;
      projection_.fill_row(static_cast<FeatureIndex>(i), std::span<double>(row, k));
      a = row;
    }
    for (std::size_t j = 0; j < k; ++j) q[j] += dw * a[j];
  }
  if (!any) return;
  for (std::size_t slot = 0; slot < features_.size(); ++slot) {
    const double* u = u_rows_.data() + slot * k;
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += u[j] * q[j];
    out[features_[slot]] += s;
  }
}

DenseVector ProjectedCombiner::combine(std::span<const double> local,
                                       std::span<const double> w_prev,
                                       std::span<const double> w_g) const {
  DenseVector out(local.begin(), local.end());
  combine_into(out, w_prev, w_g);
  return out;
}

double ProjectedCombiner::u(FeatureIndex feature, std::size_t j) const {
  if (feature >= dim_ || j >= projection_.k()) throw DimensionMismatch("u() index out of range");
  const std::int32_t s = slot_of_[feature];
  return s < 0 ? 0.0 : u_rows_[static_cast<std::size_t>(s) * projection_.k() + j];
}

double ProjectedCombiner::diagonal(FeatureIndex feature) const {
  if (feature >= dim_) throw DimensionMismatch("diagonal() index out of range");
  const std::int32_t s = slot_of_[feature];
  return s < 0 ? scale_ : slot_diagonal(static_cast<std::size_t>(s));
}

Matrix ProjectedCombiner::dense_offset() const {
  if (dim_ > ExactCombiner::kMaxDim) throw OracleScaleError("dense_offset is limited to small dim");
  const std::size_t k = projection_.k();
  Matrix a(dim_, k);
  for (std::size_t i = 0; i < dim_; ++i) projection_.fill_row(static_cast<FeatureIndex>(i), a.row(i));
  Matrix n(dim_, dim_);
  for (std::size_t i = 0; i < dim_; ++i) n(i, i) = diagonal(static_cast<FeatureIndex>(i)) - 1.0;
  for (std::size_t slot = 0; slot < features_.size(); ++slot) {
    const double* u = u_rows_.data() + slot * k;
    for (std::size_t c = 0; c < dim_; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += u[j] * a(c, j);
      n(features_[slot], c) += s;
    }
  }
  return n;
}

ExactCombiner::ExactCombiner(std::size_t dim) {
  if (dim > kMaxDim) {
    throw OracleScaleError("explicit combiner limited to " + std::to_string(kMaxDim) +
                           " features, got " + std::to_string(dim));
  }
  m_ = Matrix::identity(dim);
}

void ExactCombiner::absorb(const CombinerAction& a) {
  using K = CombinerAction::Kind;
  const std::size_t f = m_.rows();
  if (a.x.extent() > f) throw DimensionMismatch("action indexes past the combiner dimension");
  ++absorbed_;
  switch (a.kind) {
    case K::Identity:
      return;
    case K::UniformScale:
      for (std::size_t i = 0; i < f; ++i)
        for (double& e : m_.row(i)) e *= a.scale;
      return;
    case K::RankOne:
    case K::LassoRow: {
      // m <- m - s x (x^T m), then zero the dropped rows.
      std::vector<double> r(f, 0.0);
      for (std::size_t p = 0; p < a.x.nnz(); ++p) {
        const auto row = m_.row(a.x.indices[p]);
        for (std::size_t j = 0; j < f; ++j) r[j] += a.x.values[p] * row[j];
      }
      for (std::size_t p = 0; p < a.x.nnz(); ++p) {
        auto row = m_.row(a.x.indices[p]);
        const double c = a.scale * a.x.values[p];
        for (std::size_t j = 0; j < f; ++j) row[j] -= c * r[j];
      }
      if (a.kind == K::LassoRow) {
        for (FeatureIndex i : a.dropped) {
          if (i >= f) throw DimensionMismatch("dropped coordinate past the combiner dimension");
          std::fill(m_.row(i).begin(), m_.row(i).end(), 0.0);
        }
      }
      return;
    }
  }
}

DenseVector ExactCombiner::combine(std::span<const double> local, std::span<const double> w_prev,
                                   std::span<const double> w_g) const {
  const std::size_t f = m_.rows();
  if (local.size() != f || w_prev.size() != f || w_g.size() != f) {
    throw DimensionMismatch("combine inputs must all have the combiner dimension");
  }
  DenseVector dw(f);
  for (std::size_t i = 0; i < f; ++i) dw[i] = w_prev[i] - w_g[i];
  DenseVector out(local.begin(), local.end());
  const DenseVector mdw = m_.multiply(dw);
  for (std::size_t i = 0; i < f; ++i) out[i] += mdw[i];
  return out;
}

}  // namespace symsgd
