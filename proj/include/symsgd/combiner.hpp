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
#include <vector>

#include "symsgd/core.hpp"
#include "symsgd/learners.hpp"

namespace symsgd {

enum class ProjectionKind {
  Sparse,    // d in {+sqrt(3), -sqrt(3), 0} with probabilities {1/6, 1/6, 2/3}
  Gaussian,  // d ~ N(0, 1)
  Identity,  // A = I, k = f; debug mode for exact combination
};

// Random f x k matrix A with entries d / sqrt(k), E[d] = 0, Var[d] = 1, so
// E[A A^T] = I. Rows are a pure function of (seed, feature), so any subset
// can be regenerated on demand without storing A.
class Projection {
 public:
  // Throws InvalidArgument when k == 0.
  Projection(std::size_t k, std::uint64_t seed, ProjectionKind kind = ProjectionKind::Sparse);
  static Projection identity(std::size_t dim);

  std::size_t k() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }
  ProjectionKind kind() const noexcept { return kind_; }
  void reseed(std::uint64_t seed) noexcept { seed_ = seed; }

  void fill_row(FeatureIndex feature, std::span<double> out) const;
  std::vector<double> row(FeatureIndex feature) const;

 private:
  std::size_t k_;
  std::uint64_t seed_;
  ProjectionKind kind_;
  double magnitude_;
};

// Projected model combiner for one block of SGD steps.
//
// The block's combiner M is held as M = S + U A^T, where S is diagonal and
// tracked exactly (a global scale times a per-coordinate alive flag) and U is
// f x k. With S = I this is the identity-off form U = (M - I) A. Rows of U
// and A are stored only for observed features, slot-major with k contiguous
// entries per feature; every other row of U is zero.
class ProjectedCombiner {
 public:
  ProjectedCombiner(std::size_t dim, Projection projection);

  // Back to M = I with a new projection seed, keeping allocations.
  void reset(std::uint64_t seed);

  // M <- M_z M for the action of the step that was just taken. The action
  // must have been produced from the model immediately before that step.
  void absorb(const CombinerAction& a);

  // local + S dw + U (A^T dw) with dw = w_prev - w_g.
  DenseVector combine(std::span<const double> local, std::span<const double> w_prev,
                      std::span<const double> w_g) const;
  // Same, accumulated into `out`, which holds the local model on entry.
  void combine_into(std::span<double> out, std::span<const double> w_prev,
                    std::span<const double> w_g) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t k() const noexcept { return projection_.k(); }
  const Projection& projection() const noexcept { return projection_; }
  std::size_t examples_absorbed() const noexcept { return absorbed_; }
  std::span<const FeatureIndex> observed() const noexcept { return features_; }

  // Entry (feature, j) of U; zero for unobserved features.
  double u(FeatureIndex feature, std::size_t j) const;
  // Diagonal entry of S.
  double diagonal(FeatureIndex feature) const;
  // Dense N = M - I estimate S - I + U A^T, for oracle checks on small dim.
  Matrix dense_offset() const;

 private:
  std::size_t ensure_slot(FeatureIndex feature);
  double slot_diagonal(std::size_t slot) const noexcept { return scale_ * alive_[slot]; }
  void accumulate_transfer(SparseView x, double* t) const;

  std::size_t dim_;
  Projection projection_;
  double scale_ = 1.0;
  std::size_t absorbed_ = 0;
  std::vector<std::int32_t> slot_of_;
  std::vector<FeatureIndex> features_;
  std::vector<double> a_rows_;
  std::vector<double> u_rows_;
  std::vector<double> alive_;
  mutable std::vector<double> scratch_;
};

// Explicit f x f combiner, the oracle for the projected path. Limited to
// f <= kMaxDim.
class ExactCombiner {
 public:
  static constexpr std::size_t kMaxDim = 256;

  // Throws OracleScaleError when dim > kMaxDim.
  explicit ExactCombiner(std::size_t dim);

  void absorb(const CombinerAction& a);
  // local + M (w_prev - w_g).
  DenseVector combine(std::span<const double> local, std::span<const double> w_prev,
                      std::span<const double> w_g) const;

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t examples_absorbed() const noexcept { return absorbed_; }

 private:
  Matrix m_;
  std::size_t absorbed_ = 0;
};

}  // namespace symsgd
