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

#include "symsgd/parallel.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "symsgd/error.hpp"
#include "symsgd/metrics.hpp"
#include "symsgd/rng.hpp"

namespace symsgd {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5EED5;
constexpr std::uint64_t kProjectionStream = 0xC0B1;
constexpr std::uint64_t kSampleStream = 0xF2E9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_inputs(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                  const ParallelConfig& cfg, const Dataset* eval) {
  validate(kind, hp);
  validate(cfg);
  if (d.empty()) throw InvalidInput("training set has no examples");
  validate_labels(kind, d);
  if (eval) {
    if (eval->num_features() > d.num_features()) {
      throw DimensionMismatch("evaluation set has more features than the training set");
    }
    validate_labels(kind, *eval);
  }
}

// Scores the frozen model after a pass.
void record_pass(TrainReport& r, const DenseVector& w, double secs, LearnerKind kind,
                 const Hyperparams& hp, const Dataset& d, const Dataset* eval) {
  const Dataset* scored = eval && !eval->empty() ? eval : &d;
  r.pass_seconds.push_back(secs);
  r.pass_loss.push_back(loss(*scored, w, kind, hp));
  double a = std::numeric_limits<double>::quiet_NaN();
  if (is_classifier(kind)) {
    try {
      a = auc(*scored, w);
    } catch (const UndefinedMetric&) {
    }
  }
  r.pass_auc.push_back(a);
}

// Row of an example split between the frequent subspace (compact indices)
// and the infrequent remainder (global indices).
struct SplitRow {
  SparseView freq;
  SparseView infreq;
};

// Block-local frequent copy plus the shared, racily updated infrequent part.
struct SplitModel {
  double* local;
  std::size_t local_dim;
  double* shared;
  std::span<const FeatureIndex> infreq_coords;

  double dot(const SplitRow& x) const noexcept {
    double s = dot_unchecked(x.freq, local);
    if (x.infreq.empty()) return s;
    for (std::size_t p = 0; p < x.infreq.nnz(); ++p) {
      s += x.infreq.values[p] * RacyModel::load(shared[x.infreq.indices[p]]);
    }
    return s;
  }
  void axpy(double c, const SplitRow& x) noexcept {
    saxpy_unchecked(local, c, x.freq);
    for (std::size_t p = 0; p < x.infreq.nnz(); ++p) {
      double& e = shared[x.infreq.indices[p]];
      RacyModel::store(e, RacyModel::load(e) + c * x.infreq.values[p]);
    }
  }
  void scale(double c) noexcept {
    for (std::size_t i = 0; i < local_dim; ++i) local[i] *= c;
    for (FeatureIndex f : infreq_coords) RacyModel::store(shared[f], RacyModel::load(shared[f]) * c);
  }
  template <class F>
  void lasso_sweep(const SplitRow& x, F&& f, std::vector<FeatureIndex>* dropped) {
    std::size_t p = 0;
    for (std::size_t i = 0; i < local_dim; ++i) {
      double xi = 0.0;
      if (p < x.freq.nnz() && x.freq.indices[p] == i) xi = x.freq.values[p++];
      const LassoCoordinate c = f(local[i], xi);
      local[i] = c.value;
      if (!c.alive && dropped) dropped->push_back(static_cast<FeatureIndex>(i));
    }
    p = 0;
    for (FeatureIndex g : infreq_coords) {
      double xi = 0.0;
      if (p < x.infreq.nnz() && x.infreq.indices[p] == g) xi = x.infreq.values[p++];
      const LassoCoordinate c = f(RacyModel::load(shared[g]), xi);
      RacyModel::store(shared[g], c.value);
    }
  }
};

// CSR storage for one side of the split.
struct RowStore {
  std::vector<std::size_t> ptr{0};
  std::vector<FeatureIndex> idx;
  std::vector<double> val;

  SparseView row(std::size_t i) const noexcept {
    const std::size_t b = ptr[i], e = ptr[i + 1];
    return {std::span<const FeatureIndex>(idx.data() + b, e - b),
            std::span<const double>(val.data() + b, e - b)};
  }
};

struct Worker {
  DenseVector local;
  ProjectedCombiner combiner;
  CombinerAction action;
};

TrainReport run_symsgd(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                       const ParallelConfig& cfg, const FeaturePartition& part,
                       const Dataset* eval) {
  const std::size_t n = d.num_examples();
  const std::size_t f = d.num_features();
  const std::size_t nf = part.frequent.size();
  const bool all_frequent = nf == f;
  const std::size_t P = cfg.threads;
  const std::size_t b = cfg.block_size;

  // Split every example once. With every feature frequent the compact index
  // is the global one and rows are used as they are.
  RowStore freq_rows, inf_rows;
  if (!all_frequent) {
    std::vector<std::int32_t> compact(f, -1);
    for (std::size_t c = 0; c < nf; ++c) compact[part.frequent[c]] = static_cast<std::int32_t>(c);
    freq_rows.ptr.reserve(n + 1);
    inf_rows.ptr.reserve(n + 1);
    for (const Example& z : d.examples()) {
      const SparseView x = z.features.view();
      for (std::size_t p = 0; p < x.nnz(); ++p) {
        const std::int32_t c = compact[x.indices[p]];
        if (c >= 0) {
          freq_rows.idx.push_back(static_cast<FeatureIndex>(c));
          freq_rows.val.push_back(x.values[p]);
        } else {
          inf_rows.idx.push_back(x.indices[p]);
          inf_rows.val.push_back(x.values[p]);
        }
      }
      freq_rows.ptr.push_back(freq_rows.idx.size());
      inf_rows.ptr.push_back(inf_rows.idx.size());
    }
  }
  auto split_row = [&](std::size_t i) -> SplitRow {
    if (all_frequent) return {d[i].features.view(), {}};
    return {freq_rows.row(i), inf_rows.row(i)};
  };

  auto make_projection = [&](std::uint64_t seed) {
    if (cfg.exact_combiner) return Projection::identity(nf);
    return Projection(cfg.k, seed, cfg.projection);
  };
  const bool reuse = cfg.reuse_projection && kind == LearnerKind::OLS;
  auto projection_seed = [&](std::size_t pass, std::size_t step, std::size_t worker) {
    if (reuse) return derive_seed(cfg.seed, {kProjectionStream, worker});
    return derive_seed(cfg.seed, {kProjectionStream, pass, step, worker});
  };

  DenseVector global(nf, 0.0);
  DenseVector shared(f, 0.0);
  DenseVector acc(nf, 0.0);
  std::vector<Worker> workers;
  workers.reserve(P);
  for (std::size_t i = 0; i < P; ++i) {
    workers.push_back({DenseVector(nf, 0.0), ProjectedCombiner(nf, make_projection(0)), {}});
  }

  const std::size_t nblocks = (n + b - 1) / b;
  const std::size_t nsteps = (nblocks + P - 1) / P;

  // Shared schedule state, written by the coordinator between barriers.
  std::vector<std::uint32_t> order;
  std::size_t pass = 0, step = 0;
  bool done = false;

  auto run_block = [&](std::size_t i) {
    const std::size_t blk = step * P + i;
    if (blk >= nblocks) return;
    Worker& w = workers[i];
    std::copy(global.begin(), global.end(), w.local.begin());
    w.combiner.reset(projection_seed(pass, step, i));
    SplitModel model{w.local.data(), nf, shared.data(), part.infrequent};
    const std::size_t end = std::min(n, (blk + 1) * b);
    for (std::size_t t = blk * b; t < end; ++t) {
      const std::size_t e = order[t];
      const SplitRow row = split_row(e);
      const StepOutcome out = sgd_update(kind, model, row, d[e].label, hp, &w.action.dropped);
      w.action.kind = out.kind;
      w.action.scale = out.scale;
      w.action.x = row.freq;
      w.combiner.absorb(w.action);
    }
  };

  // Folds the active workers' results in worker order into the global model.
  auto reduce = [&] {
    const std::size_t active = std::min(P, nblocks - step * P);
    std::swap(acc, workers[0].local);
    for (std::size_t i = 1; i < active; ++i) {
      workers[i].combiner.combine_into(workers[i].local, acc, global);
      std::swap(acc, workers[i].local);
    }
    std::swap(global, acc);
  };

  std::barrier sync(static_cast<std::ptrdiff_t>(P + 1));
  std::vector<std::jthread> threads;
  threads.reserve(P);
  for (std::size_t i = 0; i < P; ++i) {
    threads.emplace_back([&, i] {
      for (;;) {
        sync.arrive_and_wait();
        if (done) return;
        run_block(i);
        sync.arrive_and_wait();
      }
    });
  }

  TrainReport report;
  report.frequent_features = nf;
  auto assemble = [&] {
    DenseVector w(shared);
    for (std::size_t c = 0; c < nf; ++c) w[part.frequent[c]] = global[c];
    return w;
  };
  try {
    for (pass = 0; pass < cfg.passes; ++pass) {
      order = pass_order(n, cfg.seed, pass);
      const auto t0 = Clock::now();
      for (step = 0; step < nsteps; ++step) {
        sync.arrive_and_wait();
        sync.arrive_and_wait();
        reduce();
      }
      const double secs = seconds_since(t0);
      report.examples_processed += n;
      record_pass(report, assemble(), secs, kind, hp, d, eval);
    }
  } catch (...) {
    done = true;
    sync.arrive_and_wait();
    throw;
  }
  done = true;
  sync.arrive_and_wait();
  threads.clear();
  report.final_model = assemble();
  return report;
}

}  // namespace

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Sequential: return "seq";
    case Algorithm::Hogwild: return "hogwild";
    case Algorithm::MrSymSgd: return "mr-symsgd";
    case Algorithm::AsyncSymSgd: return "async-symsgd";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "seq" || s == "sequential") return Algorithm::Sequential;
  if (s == "hogwild") return Algorithm::Hogwild;
  if (s == "mr-symsgd" || s == "mr") return Algorithm::MrSymSgd;
  if (s == "async-symsgd" || s == "async") return Algorithm::AsyncSymSgd;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

void validate(const ParallelConfig& cfg) {
  if (cfg.threads == 0) throw InvalidArgument("threads must be at least 1");
  if (cfg.block_size == 0) throw InvalidArgument("block size must be at least 1");
  if (cfg.k == 0) throw InvalidArgument("projection dimension must be at least 1");
  if (cfg.passes == 0) throw InvalidArgument("passes must be at least 1");
  if (cfg.freq_sample == 0) throw InvalidArgument("frequency sample must be at least 1");
  if (!(cfg.freq_threshold > 0.0) || !std::isfinite(cfg.freq_threshold)) {
    throw InvalidArgument("frequency threshold must be positive");
  }
}

std::vector<std::uint32_t> pass_order(std::size_t n, std::uint64_t seed, std::size_t pass) {
  if (n > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("too many examples");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(derive_seed(seed, {kShuffleStream, pass}));
  fisher_yates(std::span<std::uint32_t>(order), rng);
  return order;
}

TrainReport train_sequential(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                             const ParallelConfig& cfg, const Dataset* eval) {
  check_inputs(d, kind, hp, cfg, eval);
  TrainReport report;
  report.frequent_features = d.num_features();
  DenseVector w(d.num_features(), 0.0);
  DenseModel model{w};
  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    const auto order = pass_order(d.num_examples(), cfg.seed, pass);
    const auto t0 = Clock::now();
    for (std::uint32_t e : order) {
      sgd_update(kind, model, d[e].features.view(), d[e].label, hp, nullptr);
    }
    const double secs = seconds_since(t0);
    report.examples_processed += d.num_examples();
    record_pass(report, w, secs, kind, hp, d, eval);
  }
  report.final_model = std::move(w);
  return report;
}

TrainReport train_mr_symsgd(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                            const ParallelConfig& cfg, const Dataset* eval) {
  check_inputs(d, kind, hp, cfg, eval);
  std::vector<FeatureIndex> all(d.num_features());
  std::iota(all.begin(), all.end(), FeatureIndex{0});
  return run_symsgd(d, kind, hp, cfg, partition_features(d.num_features(), all), eval);
}

std::vector<FeatureIndex> detect_frequent_features(const Dataset& d, const ParallelConfig& cfg) {
  validate(cfg);
  const std::size_t n = d.num_examples();
  if (n == 0) return {};
  const std::size_t m = std::min(cfg.freq_sample, n);
  std::vector<std::size_t> pick(n);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, {kSampleStream}));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(pick[i], pick[j]);
  }
  std::vector<std::size_t> count(d.num_features(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (FeatureIndex f : d[pick[i]].features.view().indices) ++count[f];
  }
  const double need = cfg.freq_threshold * static_cast<double>(m);
  std::vector<FeatureIndex> out;
  for (std::size_t f = 0; f < count.size(); ++f) {
    if (count[f] > 0 && static_cast<double>(count[f]) >= need) {
      out.push_back(static_cast<FeatureIndex>(f));
    }
  }
  return out;
}

FeaturePartition partition_features(std::size_t num_features,
                                    const std::vector<FeatureIndex>& frequent) {
  std::vector<char> is_freq(num_features, 0);
  for (std::size_t i = 0; i < frequent.size(); ++i) {
    if (frequent[i] >= num_features) throw InvalidArgument("frequent feature out of range");
    if (i > 0 && frequent[i] <= frequent[i - 1]) {
      throw InvalidArgument("frequent features must be strictly ascending");
    }
    is_freq[frequent[i]] = 1;
  }
  FeaturePartition p;
  p.frequent = frequent;
  p.infrequent.reserve(num_features - frequent.size());
  for (std::size_t f = 0; f < num_features; ++f) {
    if (!is_freq[f]) p.infrequent.push_back(static_cast<FeatureIndex>(f));
  }
  return p;
}

TrainReport train_hybrid_symsgd(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                                const ParallelConfig& cfg,
                                const std::vector<FeatureIndex>& frequent, const Dataset* eval) {
  check_inputs(d, kind, hp, cfg, eval);
  return run_symsgd(d, kind, hp, cfg, partition_features(d.num_features(), frequent), eval);
}

TrainReport train_async_symsgd(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                               const ParallelConfig& cfg, const Dataset* eval) {
  check_inputs(d, kind, hp, cfg, eval);
  return run_symsgd(d, kind, hp, cfg,
                    partition_features(d.num_features(), detect_frequent_features(d, cfg)), eval);
}

TrainReport train_hogwild(const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                          const ParallelConfig& cfg, const Dataset* eval) {
  check_inputs(d, kind, hp, cfg, eval);
  const std::size_t n = d.num_examples();
  const std::size_t P = cfg.threads;
  TrainReport report;
  report.frequent_features = 0;
  DenseVector w(d.num_features(), 0.0);
  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    const auto order = pass_order(n, cfg.seed, pass);
    const auto t0 = Clock::now();
    {
      std::vector<std::jthread> threads;
      threads.reserve(P);
      for (std::size_t t = 0; t < P; ++t) {
        threads.emplace_back([&, t] {
          RacyModel model{w};
          const std::size_t lo = t * n / P, hi = (t + 1) * n / P;
          for (std::size_t i = lo; i < hi; ++i) {
            const Example& z = d[order[i]];
            sgd_update(kind, model, z.features.view(), z.label, hp, nullptr);
          }
        });
      }
    }
    const double secs = seconds_since(t0);
    report.examples_processed += n;
    record_pass(report, w, secs, kind, hp, d, eval);
  }
  report.final_model = std::move(w);
  return report;
}

TrainReport train(Algorithm algo, const Dataset& d, LearnerKind kind, const Hyperparams& hp,
                  const ParallelConfig& cfg, const Dataset* eval) {
  switch (algo) {
    case Algorithm::Sequential: return train_sequential(d, kind, hp, cfg, eval);
    case Algorithm::Hogwild: return train_hogwild(d, kind, hp, cfg, eval);
    case Algorithm::MrSymSgd: return train_mr_symsgd(d, kind, hp, cfg, eval);
    case Algorithm::AsyncSymSgd: return train_async_symsgd(d, kind, hp, cfg, eval);
  }
  throw InvalidArgument("unknown algorithm");
}

}  // namespace symsgd
