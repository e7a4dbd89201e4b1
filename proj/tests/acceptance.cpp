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

// Acceptance checks. Prints one line per criterion:
//   AC<n> PASS|FAIL|WARN|SKIP <measured values>
// and exits non-zero if any hard criterion fails. AC10 is warn-only; AC11
// runs only when the RCV1 files are available (SYMSGD_RCV1_TRAIN and
// optionally SYMSGD_RCV1_TEST).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "symsgd/analysis.hpp"
#include "symsgd/io.hpp"
#include "symsgd/learners.hpp"
#include "symsgd/metrics.hpp"
#include "symsgd/parallel.hpp"
#include "symsgd/rng.hpp"
#include "test_util.hpp"

namespace {

using namespace symsgd;
using testing::rel_l2;
using Clock = std::chrono::steady_clock;

int hard_failures = 0;

void report(int id, const char* status, const std::string& detail) {
  std::printf("AC%-2d %-4s %s\n", id, status, detail.c_str());
  std::fflush(stdout);
}

void check(int id, bool ok, const std::string& detail) {
  if (!ok) ++hard_failures;
  report(id, ok ? "PASS" : "FAIL", detail);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SyntheticSpec spec(std::size_t f, std::size_t n, double density, TaskKind task, std::uint64_t seed) {
  SyntheticSpec s;
  s.num_features = f;
  s.num_examples = n;
  s.density = density;
  s.task = task;
  s.seed = seed;
  return s;
}

ParallelConfig config(std::size_t threads, std::size_t block, std::size_t passes, std::uint64_t seed = 1) {
  ParallelConfig c;
  c.threads = threads;
  c.block_size = block;
  c.passes = passes;
  c.seed = seed;
  return c;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void ac1() {
  const Dataset d = generate_synthetic(spec(100, 10000, 0.1, TaskKind::Regression, 101)).data;
  ParallelConfig c = config(4, 256, 3);
  c.exact_combiner = true;
  const Hyperparams hp{0.01, 0};
  const auto t0 = Clock::now();
  const TrainReport mr = train_mr_symsgd(d, LearnerKind::OLS, hp, c);
  const double secs = since(t0);
  const TrainReport seq = train_sequential(d, LearnerKind::OLS, hp, c);
  const double e = rel_l2(mr.final_model, seq.final_model);
  check(1, e <= 1e-6 && secs < 30.0, fmt("exact-combiner OLS MR P=4 vs seq: rel L2 %.3e (<= 1e-6), %.2f s (< 30 s)", e, secs));
}

void ac2() {
  SyntheticSpec s = spec(1000, 60000, 0.01, TaskKind::Classification, 202);
  s.noise_sd = 1.0;
  s.normalize = true;
  const auto [train_set, test_set] = split_dataset(generate_synthetic(s).data, 50000);
  ParallelConfig c = config(4, 256, 10);
  c.k = 15;
  // Learning rate chosen by the best sequential AUC after 10 passes.
  double best_alpha = 0.0, best_auc = -1.0;
  for (double a : {0.01, 0.1, 1.0, 10.0}) {
    const double au = train_sequential(train_set, LearnerKind::Logistic, {a, 0}, c, &test_set).pass_auc.back();
    if (au > best_auc) {
      best_auc = au;
      best_alpha = a;
    }
  }
  const double mr = train_mr_symsgd(train_set, LearnerKind::Logistic, {best_alpha, 0}, c, &test_set).pass_auc.back();
  check(2, std::abs(mr - best_auc) <= 0.005,
        fmt("logistic alpha=%g: MR k=15 b=256 P=4 AUC %.5f vs seq %.5f, |diff| %.5f (<= 0.005)", best_alpha, mr, best_auc,
            std::abs(mr - best_auc)));
}

void ac3() {
  const auto t0 = Clock::now();
  const double dev = projection_unbiasedness(32, 8, 100000, 303);
  const double secs = since(t0);
  check(3, dev <= 0.013 && secs < 60.0, fmt("max |mean(AA^T) - I| = %.5f (<= 0.013), %.2f s (< 60 s)", dev, secs));
}

void ac4() {
  Rng rng(404);
  DenseVector dw(50);
  for (double& e : dw) e = rng.normal();
  const double n = norm2(dw);
  for (double& e : dw) e /= n;
  const VarianceReport r = covariance_trace_mc(Matrix::identity(50), dw, 10, 10000, 404);
  check(4, r.mc_trace >= 4.75 && r.mc_trace <= 5.36,
        fmt("M=I f=50 k=10: mc trace %.4f in [4.75, 5.36]; bounds [%.3f, %.3f]", r.mc_trace, r.lower_bound, r.upper_bound));
}

void ac5() {
  SyntheticSpec s = spec(64, 8, 0.3, TaskKind::Regression, 505);
  s.normalize = true;
  const Dataset d = generate_synthetic(s).data;
  const SpectrumReport r = singular_spectrum(dense_combiner(d, LearnerKind::OLS, {0.5, 0}, DenseVector(64, 0.0)));
  check(5, r.singular_values_N[8] < 1e-8,
        fmt("OLS n=8 f=64: sigma_8(N) = %.3e, sigma_9(N) = %.3e (< 1e-8)", r.singular_values_N[7], r.singular_values_N[8]));
}

void ac6() {
  SyntheticSpec s = spec(256, 512, 0.1, TaskKind::Classification, 606);
  s.normalize = true;
  const Dataset d = generate_synthetic(s).data;
  const std::size_t blocks[] = {64, 128, 256, 512};
  const auto r = block_spectra(d, LearnerKind::Logistic, {0.01, 0}, DenseVector(256, 0.0), blocks);
  // 1.0 admits one unit of rounding in the last place.
  const double lo = r[0].singular_values.back(), hi = r[0].singular_values.front();
  const bool in_range = lo >= 0.8 && hi <= 1.0 + 1e-12;
  bool increasing = true;
  std::string means;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double m = mean(r[i].singular_values_N);
    means += fmt(" b=%g:%.5f", static_cast<double>(blocks[i]), m);
    if (i > 0 && !(m > mean(r[i - 1].singular_values_N))) increasing = false;
  }
  check(6, in_range && increasing,
        fmt("block 64 sigma(M) in [%.5f, %.15f] (within [0.8, 1.0]);", lo, hi) + " mean sigma(N)" + means +
            (increasing ? " strictly increasing" : " NOT increasing"));
}

void ac7() {
  SyntheticSpec s = spec(20, 40, 0.4, TaskKind::Regression, 707);
  s.normalize = true;
  const Dataset reg = generate_synthetic(s).data;
  s.task = TaskKind::Classification;
  const Dataset cls = generate_synthetic(s).data;
  Rng rng(707);
  DenseVector w(20), dw(20);
  for (double& e : w) e = 0.5 * rng.normal();
  for (double& e : dw) e = rng.normal();
  const double n = norm2(dw);
  for (double& e : dw) e *= 0.05 / n;
  const TaylorErrorReport ols = taylor_error(reg, LearnerKind::OLS, {0.2, 0}, w, dw, 5, 100, 1);
  const TaylorErrorReport lg = taylor_error(cls, LearnerKind::Logistic, {1.0, 0}, w, dw, 5, 10000, 2);
  const double sr_ols = std::max(ols.sr_norm_at.at(1.0), ols.sr_norm_at.at(0.5));
  const double ratio = lg.sr_norm_at.at(1.0) / lg.sr_norm_at.at(0.5);
  const double fr_bound = 5.0 * norm2(dw) / std::sqrt(1e4);
  check(7, sr_ols <= 1e-12 && ratio >= 3.2 && ratio <= 4.8 && lg.fr_mean_norm <= fr_bound,
        fmt("OLS SR %.2e (<= 1e-12); logistic SR(dw)/SR(dw/2) %.3f in [3.2, 4.8]; FR mean %.3e (<= %.3e)", sr_ols, ratio,
            lg.fr_mean_norm, fr_bound));
}

void ac8() {
  const LearnerKind kinds[] = {LearnerKind::OLS, LearnerKind::Logistic, LearnerKind::Perceptron, LearnerKind::SVM,
                               LearnerKind::Lasso};
  bool bitwise = true;
  for (LearnerKind kind : kinds) {
    Dataset d = generate_synthetic(spec(200, 5000, 0.05,
                                        is_classifier(kind) ? TaskKind::Classification : TaskKind::Regression, 808)).data;
    if (kind == LearnerKind::Perceptron || kind == LearnerKind::SVM) d = convert_labels(d, LabelConvention::PlusMinus);
    const Hyperparams hp{0.01, kind == LearnerKind::SVM || kind == LearnerKind::Lasso ? 0.01 : 0.0};
    const ParallelConfig c = config(1, 256, 2);
    const auto seq = train_sequential(d, kind, hp, c).final_model;
    bitwise &= train_mr_symsgd(d, kind, hp, c).final_model == seq;
    bitwise &= train_hogwild(d, kind, hp, c).final_model == seq;
  }
  // Empty frequent set: same single-worker stream, and on disjoint supports
  // with four workers.
  const Dataset sparse = generate_synthetic(spec(300, 5000, 0.02, TaskKind::Classification, 809)).data;
  ParallelConfig empty = config(1, 256, 2);
  empty.freq_threshold = 2.0;
  double e_empty = rel_l2(train_async_symsgd(sparse, LearnerKind::Logistic, {0.1, 0}, empty).final_model,
                          train_hogwild(sparse, LearnerKind::Logistic, {0.1, 0}, empty).final_model);
  std::vector<Example> ex;
  Rng rng(8);
  for (FeatureIndex i = 0; i < 2000; ++i) ex.push_back({SparseVector{{i, rng.normal()}}, rng.bernoulli(0.5) ? 1.0 : 0.0});
  const Dataset disjoint(ex, 2000);
  empty.threads = 4;
  e_empty = std::max(e_empty, rel_l2(train_async_symsgd(disjoint, LearnerKind::Logistic, {0.1, 0}, empty).final_model,
                                     train_hogwild(disjoint, LearnerKind::Logistic, {0.1, 0}, empty).final_model));
  // Full frequent set on dense data.
  const Dataset dense = generate_synthetic(spec(100, 5000, 1.0, TaskKind::Classification, 810)).data;
  const ParallelConfig full = config(4, 128, 2);
  const TrainReport as = train_async_symsgd(dense, LearnerKind::Logistic, {0.01, 0}, full);
  const double e_full = rel_l2(as.final_model, train_mr_symsgd(dense, LearnerKind::Logistic, {0.01, 0}, full).final_model);
  check(8, bitwise && e_empty <= 1e-6 && e_full <= 1e-6 && as.frequent_features == 100,
        std::string("P=1 MR/Hogwild vs seq bitwise: ") + (bitwise ? "yes" : "NO") +
            fmt("; async(F=empty) vs hogwild %.2e; async(F=all) vs MR %.2e (<= 1e-6)", e_empty, e_full));
}

void ac9() {
  Rng rng(909);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 2 + rng.below(199);
    std::vector<ScoredLabel> s(m);
    const bool ties = t % 3 == 0;
    for (auto& e : s) {
      e.score = ties ? static_cast<double>(rng.below(6)) : rng.normal();
      e.positive = rng.bernoulli(0.5);
    }
    s[0].positive = true;
    s[1].positive = false;
    double wins = 0.0, pairs = 0.0;
    for (const auto& p : s)
      for (const auto& q : s)
        if (p.positive && !q.positive) {
          pairs += 1;
          wins += p.score > q.score ? 1.0 : p.score == q.score ? 0.5 : 0.0;
        }
    worst = std::max(worst, std::abs(auc(s) - wins / pairs));
  }
  check(9, worst <= 1e-12, fmt("1000 instances, m <= 200: max |sorted - brute force| = %.2e (<= 1e-12)", worst));
}

void ac10() {
  const Dataset d = generate_synthetic(spec(2000, 8192, 1.0, TaskKind::Classification, 1010)).data;
  const Hyperparams hp{0.001, 0};
  auto timed = [&](std::size_t p) {
    double best = 1e300;
    for (int r = 0; r < 2; ++r) {
      const TrainReport rep = train_mr_symsgd(d, LearnerKind::Logistic, hp, config(p, 256, 1));
      best = std::min(best, rep.pass_seconds[0]);
    }
    return best;
  };
  const double t1 = timed(1), t4 = timed(4);
  const double speedup = t1 / t4;
  const unsigned cores = std::thread::hardware_concurrency();
  report(10, speedup >= 2.0 ? "PASS" : "WARN",
         fmt("dense f=2000 MR P=4 speedup %.2fx over P=1 (target >= 2.0, warn-only); P=1 %.3f s, P=4 %.3f s, %g hardware threads",
             speedup, t1, t4, static_cast<double>(cores)));
}

void ac11() {
  const char* train_path = std::getenv("SYMSGD_RCV1_TRAIN");
  if (!train_path || !std::filesystem::exists(train_path)) {
    report(11, "SKIP", "RCV1 not available (set SYMSGD_RCV1_TRAIN and optionally SYMSGD_RCV1_TEST)");
    return;
  }
  const char* test_path = std::getenv("SYMSGD_RCV1_TEST");
  Dataset train_set = load_libsvm(train_path);
  std::optional<Dataset> test_set;
  if (test_path && std::filesystem::exists(test_path)) {
    Dataset t = load_libsvm(test_path);
    const std::size_t f = std::max(t.num_features(), train_set.num_features());
    train_set = Dataset(std::vector<Example>(train_set.examples().begin(), train_set.examples().end()), f);
    test_set = convert_labels(Dataset(std::vector<Example>(t.examples().begin(), t.examples().end()), f),
                              LabelConvention::ZeroOne);
  }
  train_set = convert_labels(std::move(train_set), LabelConvention::ZeroOne);
  const Dataset* eval = test_set ? &*test_set : nullptr;
  ParallelConfig c = config(1, 256, 10);
  const auto freq = detect_frequent_features(train_set, c);
  const DatasetStats st = dataset_stats(train_set, freq);
  double best = -1.0, alpha = 0.0;
  for (double a : {0.01, 0.1, 0.5, 1.0, 2.0}) {
    const double au = train_sequential(train_set, LearnerKind::Logistic, {a, 0}, c, eval).pass_auc.back();
    if (au > best) {
      best = au;
      alpha = a;
    }
  }
  const bool ok = std::abs(best - 0.9586) <= 0.01 && std::abs(st.avg_nnz - 74.71) <= 0.5 &&
                  std::abs(st.avg_nfnz_ratio - 0.219) <= 0.02;
  check(11, ok, fmt("RCV1 alpha=%g AUC %.4f (0.9586 +- 0.01); avg nnz %.2f (74.71); NFNZ ratio %.3f (0.219 +- 0.02)", alpha,
                    best, st.avg_nnz, st.avg_nfnz_ratio));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> all{ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11};
  for (std::size_t i = 0; i < all.size(); ++i) {
    try {
      all[i]();
    } catch (const std::exception& e) {
      ++hard_failures;
      report(static_cast<int>(i + 1), "FAIL", std::string("exception: ") + e.what());
    }
  }
  std::printf("%d hard failure(s)\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
