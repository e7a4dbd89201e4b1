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

#include <gtest/gtest.h>

#include <cmath>

#include "symsgd/analysis.hpp"
#include "symsgd/combiner.hpp"
#include "symsgd/error.hpp"
#include "symsgd/learners.hpp"
#include "test_util.hpp"

namespace symsgd {
namespace {

using K = CombinerAction::Kind;
using testing::max_abs_diff;
using testing::random_dataset;
using testing::random_dense;
using testing::rel_l2;
using testing::Labels;

const LearnerKind kAll[] = {LearnerKind::OLS, LearnerKind::Logistic, LearnerKind::Perceptron,
                            LearnerKind::SVM, LearnerKind::Lasso};

Labels labels_for(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Logistic: return Labels::ZeroOne;
    case LearnerKind::Perceptron:
    case LearnerKind::SVM: return Labels::PlusMinus;
    default: return Labels::Real;
  }
}

Hyperparams params_for(LearnerKind kind) {
  return {0.05, kind == LearnerKind::SVM || kind == LearnerKind::Lasso ? 0.1 : 0.0};
}

// Runs the block from w_g, absorbing each step into `c`; returns the local model.
template <class Combiner>
DenseVector run_block(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                      const DenseVector& w_g, Combiner& c) {
  DenseVector w = w_g;
  for (const Example& z : d.examples()) {
    c.absorb(combiner_action(kind, w, z, hp));
    w = sgd_step(kind, w, z, hp);
  }
  return w;
}

TEST(Projection, RowsAreDeterministic) {
  const Projection a(8, 99);
  EXPECT_EQ(a.row(17), a.row(17));
  EXPECT_EQ(a.row(17), Projection(8, 99).row(17));
  EXPECT_NE(a.row(17), Projection(8, 100).row(17));
}

TEST(Projection, EntryValues) {
  const Projection a(4, 5);
  const double m = std::sqrt(3.0) / 2.0;
  for (FeatureIndex f = 0; f < 500; ++f) {
    for (double e : a.row(f)) {
      EXPECT_TRUE(e == 0.0 || std::abs(e - m) < 1e-15 || std::abs(e + m) < 1e-15) << e;
    }
  }
}

TEST(Projection, ThreePointFrequencies) {
  const Projection a(8, 7);
  std::size_t zeros = 0, pos = 0, total = 0;
  for (FeatureIndex f = 0; f < 100000; ++f) {
    for (double e : a.row(f)) {
      zeros += e == 0.0;
      pos += e > 0.0;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(zeros) / total, 2.0 / 3.0, 0.01);
  EXPECT_NEAR(static_cast<double>(pos) / total, 1.0 / 6.0, 0.01);
}

TEST(Projection, ZeroKThrows) { EXPECT_THROW(Projection(0, 1), InvalidArgument); }

TEST(Projection, IdentityRows) {
  const Projection a = Projection::identity(5);
  EXPECT_EQ(a.row(2), (std::vector<double>{0, 0, 1, 0, 0}));
  EXPECT_THROW(a.row(5), DimensionMismatch);
  EXPECT_THROW(ProjectedCombiner(6, Projection::identity(5)), DimensionMismatch);
}

TEST(ProjectedCombiner, FreshIsIdentity) {
  ProjectedCombiner c(10, Projection(4, 1));
  for (FeatureIndex f = 0; f < 10; ++f) {
    EXPECT_EQ(c.diagonal(f), 1.0);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(c.u(f, j), 0.0);
  }
  Rng rng(1);
  const DenseVector local = random_dense(10, rng), wp = random_dense(10, rng), wg = random_dense(10, rng);
  const DenseVector out = c.combine(local, wp, wg);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(out[i], local[i] + wp[i] - wg[i]);
}

TEST(ProjectedCombiner, PerceptronBlockKeepsUZero) {
  const Dataset d = random_dataset(12, 40, 0.5, Labels::PlusMinus, 3);
  ProjectedCombiner c(12, Projection(5, 2));
  run_block(d, LearnerKind::Perceptron, {0.1, 0}, DenseVector(12, 0.0), c);
  EXPECT_EQ(c.examples_absorbed(), 40u);
  for (FeatureIndex f = 0; f < 12; ++f)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(c.u(f, j), 0.0);
}

TEST(ProjectedCombiner, SingleOlsStep) {
  const std::size_t f = 6, k = 4;
  const double alpha = 0.1;
  const SparseVector x{{1, 2.0}, {4, -1.0}};
  ProjectedCombiner c(f, Projection(k, 11));
  c.absorb({K::RankOne, alpha, x.view(), {}});
  const Projection& a = c.projection();
  const auto a1 = a.row(1), a4 = a.row(4);
  for (std::size_t j = 0; j < k; ++j) {
    const double xta = 2.0 * a1[j] - 1.0 * a4[j];
    EXPECT_NEAR(c.u(1, j), -alpha * 2.0 * xta, 1e-15);
    EXPECT_NEAR(c.u(4, j), -alpha * -1.0 * xta, 1e-15);
    EXPECT_EQ(c.u(0, j), 0.0);
  }
}

TEST(ProjectedCombiner, SvmStepsScaleDiagonal) {
  const std::size_t f = 5, k = 3;
  const double cst = 0.9;
  ProjectedCombiner c(f, Projection(k, 4));
  for (int i = 0; i < 7; ++i) c.absorb({K::UniformScale, cst, {}, {}});
  const double cn = std::pow(cst, 7);
  for (FeatureIndex i = 0; i < f; ++i) EXPECT_NEAR(c.diagonal(i), cn, 1e-15);
  // N A = (c^n - 1) A on every row.
  const Matrix n = c.dense_offset();
  const Matrix a = projection_matrix(c.projection(), f);
  const Matrix na = n.multiply(a);
  for (std::size_t i = 0; i < f; ++i)
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(na(i, j), (cn - 1.0) * a(i, j), 1e-14);
}

TEST(ProjectedCombiner, ZeroDeltaReturnsLocal) {
  const Dataset d = random_dataset(20, 30, 0.3, Labels::ZeroOne, 8);
  ProjectedCombiner c(20, Projection(6, 3));
  const DenseVector wg(20, 0.25);
  const DenseVector local = run_block(d, LearnerKind::Logistic, {0.2, 0}, wg, c);
  EXPECT_EQ(c.combine(local, wg, wg), local);
}

TEST(ProjectedCombiner, UnobservedCoordinatesPassDelta) {
  // Only features 0..4 occur; 5..9 are never touched.
  std::vector<Example> ex;
  Rng rng(4);
  for (int i = 0; i < 20; ++i) ex.push_back({testing::random_sparse(5, 0.8, rng), rng.normal()});
  const Dataset d(ex, 10);
  ProjectedCombiner c(10, Projection(4, 6));
  const DenseVector wg(10, 0.0);
  const DenseVector local = run_block(d, LearnerKind::OLS, {0.05, 0}, wg, c);
  const DenseVector wp = random_dense(10, rng);
  const DenseVector out = c.combine(local, wp, wg);
  for (std::size_t j = 5; j < 10; ++j) {
    EXPECT_DOUBLE_EQ(out[j], local[j] + wp[j]);
    for (std::size_t q = 0; q < 4; ++q) EXPECT_EQ(c.u(static_cast<FeatureIndex>(j), q), 0.0);
  }
}

TEST(ProjectedCombiner, DimensionChecks) {
  ProjectedCombiner c(3, Projection(2, 1));
  const SparseVector x{{3, 1.0}};
  EXPECT_THROW(c.absorb({K::RankOne, 0.1, x.view(), {}}), DimensionMismatch);
  EXPECT_THROW(c.combine(DenseVector(3), DenseVector(2), DenseVector(3)), DimensionMismatch);
}

TEST(ProjectedCombiner, ResetRestoresIdentity) {
  const Dataset d = random_dataset(8, 10, 0.5, Labels::Real, 9);
  ProjectedCombiner c(8, Projection(3, 1));
  run_block(d, LearnerKind::OLS, {0.1, 0}, DenseVector(8, 0.0), c);
  c.reset(2);
  EXPECT_EQ(c.examples_absorbed(), 0u);
  EXPECT_TRUE(c.observed().empty());
  EXPECT_EQ(c.projection().seed(), 2u);
  for (FeatureIndex f = 0; f < 8; ++f) EXPECT_EQ(c.u(f, 0), 0.0);
}

TEST(ExactCombiner, EmptyAndSingleStep) {
  ExactCombiner e(2);
  const DenseVector local{1, 2}, wp{0.5, 0.5}, wg{0, 0};
  EXPECT_EQ(e.combine(local, wp, wg), (DenseVector{1.5, 2.5}));
  const SparseVector x{{0, 1.0}, {1, 2.0}};
  e.absorb({K::RankOne, 0.1, x.view(), {}});
  const Matrix& m = e.matrix();
  EXPECT_DOUBLE_EQ(m(0, 0), 0.9);
  EXPECT_DOUBLE_EQ(m(0, 1), -0.2);
  EXPECT_DOUBLE_EQ(m(1, 0), -0.2);
  EXPECT_DOUBLE_EQ(m(1, 1), 1.0 - 0.4);
}

TEST(ExactCombiner, SizeGuard) { EXPECT_THROW(ExactCombiner(257), OracleScaleError); }

TEST(ExactCombiner, OlsBlockReproducesSequential) {
  const std::size_t f = 30;
  const Dataset d = random_dataset(f, 200, 0.2, Labels::Real, 15);
  const Hyperparams hp{0.05, 0};
  Rng rng(2);
  const DenseVector wg = random_dense(f, rng), wp = random_dense(f, rng);
  ExactCombiner e(f);
  const DenseVector local = run_block(d, LearnerKind::OLS, hp, wg, e);
  const DenseVector want = sgd_run(d, LearnerKind::OLS, hp, wp);
  EXPECT_LE(rel_l2(e.combine(local, wp, wg), want), 1e-6);
}

// Piecewise-linear learners are reproduced exactly while no indicator flips.
TEST(ExactCombiner, PiecewiseLinearBlocksReproduceSequential) {
  const std::size_t f = 10;
  for (LearnerKind kind : {LearnerKind::SVM, LearnerKind::Perceptron}) {
    const Dataset d = random_dataset(f, 50, 0.5, Labels::PlusMinus, 16);
    const Hyperparams hp{0.05, kind == LearnerKind::SVM ? 0.1 : 0.0};
    Rng rng(3);
    const DenseVector wg = random_dense(f, rng);
    DenseVector wp = wg;
    const DenseVector dir = random_dense(f, rng);
    for (std::size_t i = 0; i < f; ++i) wp[i] += 1e-7 * dir[i];
    ExactCombiner e(f);
    const DenseVector local = run_block(d, kind, hp, wg, e);
    const DenseVector want = sgd_run(d, kind, hp, wp);
    EXPECT_LE(max_abs_diff(e.combine(local, wp, wg), want), 1e-12) << to_string(kind);
  }
}

TEST(ProjectedProperties, IdentityProjectionMatchesExact) {
  const std::size_t f = 12;
  for (LearnerKind kind : kAll) {
    const Dataset d = random_dataset(f, 60, 0.4, labels_for(kind), 31);
    const Hyperparams hp = params_for(kind);
    Rng rng(5);
    const DenseVector wg = random_dense(f, rng, 0.3), wp = random_dense(f, rng, 0.3);
    ExactCombiner e(f);
    ProjectedCombiner p(f, Projection::identity(f));
    const DenseVector le = run_block(d, kind, hp, wg, e);
    const DenseVector lp = run_block(d, kind, hp, wg, p);
    ASSERT_EQ(le, lp);
    EXPECT_LE(max_abs_diff(p.combine(lp, wp, wg), e.combine(le, wp, wg)), 1e-12) << to_string(kind);
    // Full offset matrix agrees too.
    const Matrix n = p.dense_offset();
    const Matrix ne = e.matrix().minus_identity();
    for (std::size_t i = 0; i < f; ++i)
      for (std::size_t j = 0; j < f; ++j) EXPECT_NEAR(n(i, j), ne(i, j), 1e-12) << to_string(kind);
  }
}

TEST(ProjectedProperties, SupportOfU) {
  const std::size_t f = 40;
  std::vector<Example> ex;
  Rng rng(6);
  for (int i = 0; i < 30; ++i) ex.push_back({testing::random_sparse(20, 0.3, rng), rng.bernoulli(0.5) ? 1.0 : 0.0});
  const Dataset d(ex, f);
  ProjectedCombiner c(f, Projection(7, 9));
  run_block(d, LearnerKind::Logistic, {0.3, 0}, DenseVector(f, 0.0), c);
  std::vector<bool> seen(f, false);
  for (const Example& z : d.examples())
    for (FeatureIndex i : z.features.indices()) seen[i] = true;
  for (FeatureIndex i = 0; i < f; ++i) {
    if (seen[i]) continue;
    for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(c.u(i, j), 0.0);
  }
}

// Averaging projected combinations over seeds converges to the exact one.
TEST(ProjectedProperties, UnbiasedOverSeeds) {
  const std::size_t f = 16, k = 4;
  const Dataset d = random_dataset(f, 16, 0.4, Labels::ZeroOne, 41);
  const Hyperparams hp{0.5, 0};
  Rng rng(7);
  const DenseVector wg = random_dense(f, rng, 0.3), wp = random_dense(f, rng, 0.3);
  ExactCombiner e(f);
  const DenseVector local = run_block(d, LearnerKind::Logistic, hp, wg, e);
  const DenseVector want = e.combine(local, wp, wg);

  auto deviation = [&](std::size_t trials) {
    DenseVector mean(f, 0.0);
    ProjectedCombiner c(f, Projection(k, 0));
    for (std::size_t t = 0; t < trials; ++t) {
      c.reset(derive_seed(1234, {t}));
      run_block(d, LearnerKind::Logistic, hp, wg, c);
      const DenseVector out = c.combine(local, wp, wg);
      for (std::size_t i = 0; i < f; ++i) mean[i] += out[i] / static_cast<double>(trials);
    }
    return max_abs_diff(mean, want);
  };
  const double d1 = deviation(2500), d2 = deviation(10000);
  double scale = 0.0;
  for (std::size_t i = 0; i < f; ++i) scale = std::max(scale, std::abs(want[i] - local[i]));
  EXPECT_LE(d2, 0.05 * scale);
  const double ratio = d1 / d2;
  EXPECT_GT(ratio, 1.2);
  EXPECT_LT(ratio, 3.5);
}

}  // namespace
}  // namespace symsgd
