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

#include "symsgd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "symsgd/error.hpp"
#include "symsgd/rng.hpp"

namespace symsgd {

namespace {

constexpr std::size_t kOracleMax = ExactCombiner::kMaxDim;
constexpr std::size_t kMonteCarloMax = 128;
constexpr std::size_t kChunks = 64;

void require_square(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("expected a square matrix");
}

// Runs body(chunk) for chunk in [0, chunks) on a few threads. Chunks own
// disjoint outputs so results do not depend on scheduling.
void for_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t nt = std::min(hw, chunks);
  if (nt <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::jthread> threads;
  for (std::size_t t = 0; t < nt; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t c = t; c < chunks; c += nt) body(c);
    });
  }
}

double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

// y = A (A^T x) with A stored f x k.
void project_round_trip(const Matrix& a, std::span<const double> x, std::span<double> y,
                        std::vector<double>& tmp) {
  const std::size_t f = a.rows(), k = a.cols();
  tmp.assign(k, 0.0);
  for (std::size_t i = 0; i < f; ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = 0; j < k; ++j) tmp[j] += a(i, j) * x[i];
  }
  for (std::size_t i = 0; i < f; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += a(i, j) * tmp[j];
    y[i] = s;
  }
}

}  // namespace

std::vector<double> singular_values(const Matrix& m) {
  require_square(m);
  const std::size_t n = m.rows();
  // Column-major copy.
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[j * n + i] = m(i, j);
  constexpr double eps = 1e-15;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      double* gp = g.data() + p * n;
      for (std::size_t q = p + 1; q < n; ++q) {
        double* gq = g.data() + q * n;
        double a = 0.0, b = 0.0, c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          a += gp[i] * gp[i];
          b += gq[i] * gq[i];
          c += gp[i] * gq[i];
        }
        if (c == 0.0 || std::abs(c) <= eps * std::sqrt(a * b)) continue;
        rotated = true;
        const double zeta = (b - a) / (2.0 * c);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = gp[i], y = gq[i];
          gp[i] = cs * x - sn * y;
          gq[i] = sn * x + cs * y;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = std::sqrt(norm_sq({g.data() + j * n, n}));
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

std::vector<double> symmetric_eigenvalues(const Matrix& m, double tol) {
  require_square(m);
  const std::size_t n = m.rows();
  Matrix a = m;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-9 * (1.0 + std::abs(a(i, j)))) {
        throw InvalidArgument("symmetric_eigenvalues needs a symmetric matrix");
      }
  auto off = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < 100 && off() > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

DenseVector sgd_run(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                    std::span<const double> w0) {
  if (w0.size() != d.num_features()) throw DimensionMismatch("w0 must have num_features entries");
  DenseVector w(w0.begin(), w0.end());
  DenseModel model{w};
  for (const Example& z : d.examples()) sgd_update(kind, model, z.features.view(), z.label, hp, nullptr);
  return w;
}

Matrix dense_combiner(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                      std::span<const double> w0) {
  if (w0.size() != d.num_features()) throw DimensionMismatch("w0 must have num_features entries");
  ExactCombiner m(d.num_features());
  DenseVector w(w0.begin(), w0.end());
  DenseModel model{w};
  CombinerAction action;
  for (const Example& z : d.examples()) {
    const SparseView x = z.features.view();
    const StepOutcome out = sgd_update(kind, model, x, z.label, hp, &action.dropped);
    action.kind = out.kind;
    action.scale = out.scale;
    action.x = x;
    m.absorb(action);
  }
  return m.matrix();
}

Matrix projection_matrix(const Projection& a, std::size_t f) {
  Matrix out(f, a.k());
  for (std::size_t i = 0; i < f; ++i) a.fill_row(static_cast<FeatureIndex>(i), out.row(i));
  return out;
}

SpectrumReport singular_spectrum(const Matrix& m) {
  require_square(m);
  if (m.rows() > kOracleMax) throw OracleScaleError("spectra are limited to 256 features");
  SpectrumReport r;
  r.singular_values = singular_values(m);
  r.singular_values_N = singular_values(m.minus_identity());
  return r;
}

std::vector<SpectrumReport> block_spectra(const Dataset& d, LearnerKind kind,
                                          const Hyperparams& hp, std::span<const double> w0,
                                          std::span<const std::size_t> block_sizes) {
  std::vector<SpectrumReport> out;
  for (std::size_t b : block_sizes) {
    if (b > d.num_examples()) throw InvalidArgument("block size exceeds the dataset");
    Dataset prefix(std::vector<Example>(d.examples().begin(), d.examples().begin() + b),
                   d.num_features());
    SpectrumReport r = singular_spectrum(dense_combiner(prefix, kind, hp, w0));
    r.n_examples = b;
    r.alpha = hp.alpha;
    out.push_back(std::move(r));
  }
  return out;
}

double projection_unbiasedness(std::size_t f, std::size_t k, std::size_t trials,
                               std::uint64_t seed, ProjectionKind kind) {
  if (trials < 100) throw InvalidArgument("projection_unbiasedness needs at least 100 trials");
  if (f == 0) throw InvalidArgument("f must be positive");
  std::vector<std::vector<double>> partial(kChunks, std::vector<double>(f * f, 0.0));
  for_chunks(kChunks, [&](std::size_t c) {
    std::vector<double>& acc = partial[c];
    std::vector<double> a(f * k);
    for (std::size_t t = c; t < trials; t += kChunks) {
      const Projection p(k, derive_seed(seed, {t}), kind);
      for (std::size_t i = 0; i < f; ++i)
        p.fill_row(static_cast<FeatureIndex>(i), std::span<double>(a.data() + i * k, k));
      for (std::size_t i = 0; i < f; ++i) {
        const double* ai = a.data() + i * k;
        for (std::size_t j = i; j < f; ++j) {
          const double* aj = a.data() + j * k;
          double s = 0.0;
          for (std::size_t q = 0; q < k; ++q) s += ai[q] * aj[q];
          acc[i * f + j] += s;
        }
      }
    }
  });
  double worst = 0.0;
  const double inv = 1.0 / static_cast<double>(trials);
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = i; j < f; ++j) {
      double s = 0.0;
      for (const auto& p : partial) s += p[i * f + j];
      worst = std::max(worst, std::abs(s * inv - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

VarianceReport covariance_trace_mc(const Matrix& m, std::span<const double> delta_w,
                                   std::size_t k, std::size_t trials, std::uint64_t seed,
                                   ProjectionKind kind) {
  require_square(m);
  const std::size_t f = m.rows();
  if (f > kMonteCarloMax) throw OracleScaleError("covariance_trace_mc is limited to 128 features");
  if (delta_w.size() != f) throw DimensionMismatch("delta_w must match the matrix size");
  if (trials < 1000) throw InvalidArgument("covariance_trace_mc needs at least 1000 trials");
  if (k == 0) throw InvalidArgument("k must be positive");

  // Per-chunk Welford accumulators, merged in chunk order.
  struct Moments {
    std::size_t n = 0;
    std::vector<double> mean, m2;
  };
  std::vector<Moments> parts(kChunks);
  for_chunks(kChunks, [&](std::size_t c) {
    Moments& mo = parts[c];
    mo.mean.assign(f, 0.0);
    mo.m2.assign(f, 0.0);
    std::vector<double> y(f), v(f), tmp;
    for (std::size_t t = c; t < trials; t += kChunks) {
      const Matrix a = projection_matrix(Projection(k, derive_seed(seed, {t}), kind), f);
      project_round_trip(a, delta_w, y, tmp);
      for (std::size_t i = 0; i < f; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < f; ++j) s += m(i, j) * y[j];
        v[i] = s;
      }
      ++mo.n;
      for (std::size_t i = 0; i < f; ++i) {
        const double d = v[i] - mo.mean[i];
        mo.mean[i] += d / static_cast<double>(mo.n);
        mo.m2[i] += d * (v[i] - mo.mean[i]);
      }
    }
  });
  Moments all{0, std::vector<double>(f, 0.0), std::vector<double>(f, 0.0)};
  for (const Moments& p : parts) {
    if (p.n == 0) continue;
    const double na = static_cast<double>(all.n), nb = static_cast<double>(p.n);
    for (std::size_t i = 0; i < f; ++i) {
      const double d = p.mean[i] - all.mean[i];
      all.mean[i] += d * nb / (na + nb);
      all.m2[i] += p.m2[i] + d * d * na * nb / (na + nb);
    }
    all.n += p.n;
  }

  VarianceReport r;
  r.k = k;
  r.trials = trials;
  double tr = 0.0;
  for (double e : all.m2) tr += e;
  r.mc_trace = tr / static_cast<double>(trials - 1);

  const double dw2 = norm_sq(delta_w);
  const std::vector<double> sv = singular_values(m);
  double sum_sq = 0.0;
  for (double s : sv) sum_sq += s * s;
  const double smax = sv.empty() ? 0.0 : sv.front();
  const double kd = static_cast<double>(k);
  r.lower_bound = dw2 / kd * sum_sq;
  r.upper_bound = dw2 / kd * (sum_sq + smax * smax);
  const DenseVector mdw = m.multiply(delta_w);
  double fro = 0.0;
  for (std::size_t i = 0; i < f; ++i)
    for (std::size_t j = 0; j < f; ++j) fro += m(i, j) * m(i, j);
  r.exact_trace = (norm_sq(mdw) + dw2 * fro) / kd;
  return r;
}

TaylorErrorReport taylor_error(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                               std::span<const double> w, std::span<const double> delta_w,
                               std::size_t k, std::size_t trials, std::uint64_t seed,
                               std::span<const double> scales) {
  const std::size_t f = d.num_features();
  if (f > kMonteCarloMax) throw OracleScaleError("taylor_error is limited to 128 features");
  if (w.size() != f || delta_w.size() != f) throw DimensionMismatch("w and delta_w must have f entries");
  if (k == 0) throw InvalidArgument("k must be positive");
  if (trials == 0) throw InvalidArgument("trials must be positive");

  TaylorErrorReport r;
  const DenseVector end = sgd_run(d, kind, hp, w);
  DenseVector start(f);
  for (double s : scales) {
    if (!(s > 0.0)) throw InvalidArgument("Taylor scales must be positive");
    for (std::size_t i = 0; i < f; ++i) start[i] = w[i] - s * delta_w[i];
    const DenseVector from = sgd_run(d, kind, hp, start);
    const Matrix m = dense_combiner(d, kind, hp, start);
    DenseVector step(f);
    for (std::size_t i = 0; i < f; ++i) step[i] = s * delta_w[i];
    const DenseVector lin = m.multiply(step);
    double e = 0.0;
    for (std::size_t i = 0; i < f; ++i) {
      const double t = end[i] - from[i] - lin[i];
      e += t * t;
    }
    r.sr_norm_at[s] = std::sqrt(e);
  }

  for (std::size_t i = 0; i < f; ++i) start[i] = w[i] - delta_w[i];
  const Matrix n = dense_combiner(d, kind, hp, start).minus_identity();

  std::vector<std::vector<double>> sums(kChunks, std::vector<double>(f, 0.0));
  std::vector<double> second(kChunks, 0.0);
  for_chunks(kChunks, [&](std::size_t c) {
    std::vector<double> y(f), tmp;
    for (std::size_t t = c; t < trials; t += kChunks) {
      const Matrix a = projection_matrix(Projection(k, derive_seed(seed, {t})), f);
      project_round_trip(a, delta_w, y, tmp);
      for (std::size_t i = 0; i < f; ++i) y[i] -= delta_w[i];
      double sq = 0.0;
      for (std::size_t i = 0; i < f; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < f; ++j) s += n(i, j) * y[j];
        sums[c][i] += s;
        sq += s * s;
      }
      second[c] += sq;
    }
  });
  const double inv = 1.0 / static_cast<double>(trials);
  double mean_sq = 0.0, sec = 0.0;
  for (std::size_t i = 0; i < f; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < kChunks; ++c) s += sums[c][i];
    mean_sq += (s * inv) * (s * inv);
  }
  for (double s : second) sec += s;
  r.fr_mean_norm = std::sqrt(mean_sq);
  r.fr_second_moment = sec * inv;
  return r;
}

}  // namespace symsgd
