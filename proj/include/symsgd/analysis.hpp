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
#include <map>
#include <span>
#include <vector>

#include "symsgd/combiner.hpp"
#include "symsgd/core.hpp"
#include "symsgd/learners.hpp"

namespace symsgd {

// Singular values of a square matrix, descending. One-sided (Hestenes)
// Jacobi: columns are rotated pairwise until mutually orthogonal, which
// diagonalizes M^T M without forming it and keeps tiny values accurate.
std::vector<double> singular_values(const Matrix& m);

// Eigenvalues of a symmetric matrix, descending, by cyclic Jacobi rotations
// until the off-diagonal Frobenius norm drops below `tol`.
std::vector<double> symmetric_eigenvalues(const Matrix& m, double tol = 1e-10);

// S_D(w0): plain SGD over d in dataset order.
DenseVector sgd_run(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                    std::span<const double> w0);

// M_D(w0), the explicit f x f combiner of the same run. Throws
// OracleScaleError for f > 256.
Matrix dense_combiner(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                      std::span<const double> w0);

// Dense f x k projection matrix.
Matrix projection_matrix(const Projection& a, std::size_t f);

struct SpectrumReport {
  std::vector<double> singular_values;    // sigma(M), descending
  std::vector<double> singular_values_N;  // sigma(M - I), descending
  std::size_t n_examples = 0;
  double alpha = 0.0;
};

// Throws DimensionMismatch on a non-square matrix, OracleScaleError past 256.
SpectrumReport singular_spectrum(const Matrix& m);

// Spectra of the combiners over the first b examples of d from w0, one per
// block size.
std::vector<SpectrumReport> block_spectra(const Dataset& d, LearnerKind kind,
                                          const Hyperparams& hp, std::span<const double> w0,
                                          std::span<const std::size_t> block_sizes);

// max |mean(A A^T) - I| over `trials` independently seeded f x k projections.
// Throws InvalidArgument for trials < 100.
double projection_unbiasedness(std::size_t f, std::size_t k, std::size_t trials,
                               std::uint64_t seed,
                               ProjectionKind kind = ProjectionKind::Sparse);

struct VarianceReport {
  double mc_trace = 0.0;     // sample estimate of tr Cov[M A A^T dw]
  double lower_bound = 0.0;  // |dw|^2 / k * sum sigma_i^2
  double upper_bound = 0.0;  // |dw|^2 / k * (sum sigma_i^2 + sigma_max^2)
  double exact_trace = 0.0;  // (|M dw|^2 + |dw|^2 |M|_F^2) / k
  std::size_t k = 0;
  std::size_t trials = 0;
};

// Requires f <= 128 and trials >= 1000.
VarianceReport covariance_trace_mc(const Matrix& m, std::span<const double> delta_w,
                                   std::size_t k, std::size_t trials, std::uint64_t seed,
                                   ProjectionKind kind = ProjectionKind::Sparse);

struct TaylorErrorReport {
  double fr_mean_norm = 0.0;      // |mean_A (M - I)(A A^T - I) dw|
  double fr_second_moment = 0.0;  // mean_A |(M - I)(A A^T - I) dw|^2
  // scale s -> |S(w) - S(w - s dw) - M(w - s dw) s dw|
  std::map<double, double> sr_norm_at;
};

inline constexpr double kDefaultTaylorScalesData[] = {1.0, 0.5};
inline constexpr std::span<const double> kDefaultTaylorScales{kDefaultTaylorScalesData};

// M is evaluated at w - dw for the first-order term. Requires f <= 128.
TaylorErrorReport taylor_error(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                               std::span<const double> w, std::span<const double> delta_w,
                               std::size_t k, std::size_t trials, std::uint64_t seed,
                               std::span<const double> scales = kDefaultTaylorScales);

}  // namespace symsgd
