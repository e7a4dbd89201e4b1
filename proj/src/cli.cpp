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

#include "symsgd/cli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "symsgd/analysis.hpp"
#include "symsgd/error.hpp"
#include "symsgd/io.hpp"
#include "symsgd/metrics.hpp"
#include "symsgd/parallel.hpp"
#include "symsgd/rng.hpp"

namespace symsgd {

using nlohmann::json;

std::string model_checksum(std::span<const double> w) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double v : w) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFFu;
      h *= 0x100000001b3ull;
    }
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::size_t select_sweep_row(std::span<const SweepRow> rows, std::span<const SweepRow> references,
                             bool higher_is_better) {
  if (rows.empty()) throw InvalidArgument("sweep produced no rows");
  auto better = [&](double a, double b) { return higher_is_better ? a > b : a < b; };
  double alpha = rows.front().alpha;
  double ref = std::numeric_limits<double>::quiet_NaN();
  bool have_ref = false;
  for (const SweepRow& r : references) {
    if (std::isnan(r.metric)) continue;
    if (!have_ref || better(r.metric, ref)) {
      alpha = r.alpha;
      ref = r.metric;
      have_ref = true;
    }
  }
  if (!have_ref) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (better(rows[i].metric, rows[best].metric)) best = i;
    }
    return best;
  }
  auto gap = [&](const SweepRow& r) {
    const double d = std::abs(r.metric - ref);
    return higher_is_better ? d : d / std::max(std::abs(ref), 1e-300);
  };
  std::optional<std::size_t> pick, closest;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    if (r.alpha != alpha || std::isnan(r.metric)) continue;
    if (!closest || gap(r) < gap(rows[*closest])) closest = i;
    if (gap(r) >= kAucWindow) continue;
    if (!pick) {
      pick = i;
      continue;
    }
    const SweepRow& p = rows[*pick];
    if (r.seconds < p.seconds || (r.seconds == p.seconds && (r.k < p.k || (r.k == p.k && r.block_size > p.block_size)))) {
      pick = i;
    }
  }
  if (pick) return *pick;
  if (closest) return *closest;
  return 0;
}

namespace {

struct Options {
  std::string algo = "mr-symsgd";
  std::string learner = "logistic";
  std::string data, test_data, out;
  double alpha = 0.01;
  double lambda = 0.0;
  std::size_t threads = 1;
  std::size_t block_size = 256;
  std::size_t k = 15;
  std::size_t passes = 10;
  std::uint64_t seed = 1;
  std::size_t repeat = 5;
  double freq_threshold = 0.10;
  std::size_t freq_sample = 1000;
  bool exact_combiner = false;
  std::string projection = "sparse";
  bool reuse_projection = false;
  std::string label_convention = "none";
  std::size_t num_features = 0;
  bool max_abs = false;
  std::vector<std::string> grid;
  // synthetic data
  std::size_t gen_features = 1000;
  std::size_t gen_examples = 10000;
  double gen_density = 0.1;
  double gen_noise = 0.0;
  std::uint64_t gen_seed = 1;
  std::string gen_task = "auto";
  bool gen_normalize = false;
  std::size_t gen_hot_features = 0;
  double gen_hot_density = 0.5;
  // analyze
  std::string analysis = "all";
  std::size_t dim = 64;
  std::size_t trials = 0;
  double delta = 0.1;
};

std::string env_name(const std::string& flag) {
  std::string s = "SYMSGD_";
  for (char c : flag.substr(2)) s += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return s;
}

template <class T>
CLI::Option* add(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
  return app->add_option(flag, var, help)->envname(env_name(flag))->capture_default_str();
}

CLI::Option* add_flag(CLI::App* app, const std::string& flag, bool& var, const std::string& help) {
  return app->add_flag(flag, var, help)->envname(env_name(flag));
}

void add_data_options(CLI::App* app, Options& o) {
  add(app, "--data", o.data, "training file (LibSVM, optionally .gz); synthetic if omitted")
      ->check(CLI::ExistingFile);
  add(app, "--test-data", o.test_data, "evaluation file")->check(CLI::ExistingFile);
  add(app, "--label-convention", o.label_convention, "none, auto (learner default), 01 or pm1")
      ->check(CLI::IsMember({"auto", "none", "01", "zero-one", "pm1", "plus-minus"}));
  add(app, "--num-features", o.num_features, "feature count override (0 infers)");
  add_flag(app, "--max-abs-scale", o.max_abs, "divide each feature by its largest magnitude");
  add(app, "--gen-features", o.gen_features, "synthetic feature count");
  add(app, "--gen-examples", o.gen_examples, "synthetic example count");
  add(app, "--gen-density", o.gen_density, "synthetic feature inclusion probability");
  add(app, "--gen-noise", o.gen_noise, "synthetic label noise sd");
  add(app, "--gen-seed", o.gen_seed, "synthetic data seed");
  add(app, "--gen-task", o.gen_task, "auto, regression or classification")
      ->check(CLI::IsMember({"auto", "regression", "classification"}));
  add_flag(app, "--gen-normalize", o.gen_normalize, "unit-normalize synthetic examples");
  add(app, "--gen-hot-features", o.gen_hot_features, "number of planted frequent features");
  add(app, "--gen-hot-density", o.gen_hot_density, "inclusion probability of planted features");
}

void add_learner_options(CLI::App* app, Options& o) {
  add(app, "--learner", o.learner, "ols, logistic, perceptron, svm or lasso");
  add(app, "--alpha", o.alpha, "learning rate");
  add(app, "--lambda", o.lambda, "regularization (svm, lasso)");
}

void add_parallel_options(CLI::App* app, Options& o) {
  add(app, "--algo", o.algo, "seq, hogwild, mr-symsgd or async-symsgd");
  add(app, "--threads", o.threads, "worker count");
  add(app, "--block-size", o.block_size, "examples per block per worker");
  add(app, "--proj-dim", o.k, "projection dimension k");
  add(app, "--passes", o.passes, "passes over the data");
  add(app, "--seed", o.seed, "run seed (shuffles, projections, sampling)");
  add(app, "--freq-threshold", o.freq_threshold, "frequent-feature fraction");
  add(app, "--freq-sample", o.freq_sample, "examples sampled for frequency detection");
  add_flag(app, "--exact-combiner", o.exact_combiner, "debug: identity projection");
  add(app, "--projection", o.projection, "sparse or gaussian")
      ->check(CLI::IsMember({"sparse", "gaussian"}));
  add_flag(app, "--reuse-projection", o.reuse_projection, "one projection per worker (ols)");
}

struct Loaded {
  Dataset train;
  std::optional<Dataset> test;
  bool synthetic = false;
};

// "auto" picks the learner's convention. Generated data is always brought to
// it; files are converted only on request.
LabelConvention convention_for(const Options& o, LearnerKind kind, bool synthetic) {
  if (o.label_convention != "auto" && !(synthetic && o.label_convention == "none")) {
    return parse_label_convention(o.label_convention);
  }
  switch (kind) {
    case LearnerKind::Logistic: return LabelConvention::ZeroOne;
    case LearnerKind::Perceptron:
    case LearnerKind::SVM: return LabelConvention::PlusMinus;
    default: return LabelConvention::None;
  }
}

SyntheticSpec synthetic_spec(const Options& o, LearnerKind kind) {
  SyntheticSpec s;
  s.num_features = o.gen_features;
  s.num_examples = o.gen_examples;
  s.density = o.gen_density;
  s.noise_sd = o.gen_noise;
  s.seed = o.gen_seed;
  s.normalize = o.gen_normalize;
  s.hot_features = o.gen_hot_features;
  s.hot_density = o.gen_hot_density;
  if (o.gen_task == "auto") {
    s.task = is_classifier(kind) ? TaskKind::Classification : TaskKind::Regression;
  } else {
    s.task = o.gen_task == "classification" ? TaskKind::Classification : TaskKind::Regression;
  }
  return s;
}

Loaded load_data(const Options& o, LearnerKind kind) {
  Loaded l;
  ParseOptions po;
  if (o.num_features > 0) po.num_features = o.num_features;
  if (o.data.empty()) {
    l.train = generate_synthetic(synthetic_spec(o, kind)).data;
    l.synthetic = true;
  } else {
    l.train = load_libsvm(o.data, po);
  }
  if (!o.test_data.empty()) {
    Dataset t = load_libsvm(o.test_data, po);
    const std::size_t f = std::max(t.num_features(), l.train.num_features());
    auto widen = [f](const Dataset& d) {
      return Dataset(std::vector<Example>(d.examples().begin(), d.examples().end()), f);
    };
    l.train = widen(l.train);
    t = widen(t);
    l.test = std::move(t);
  }
  if (o.max_abs) {
    if (l.test) {
      const std::size_t n = l.train.num_examples();
      std::vector<Example> all(l.train.examples().begin(), l.train.examples().end());
      all.insert(all.end(), l.test->examples().begin(), l.test->examples().end());
      auto [a, b] = split_dataset(max_abs_scaled(Dataset(std::move(all), l.train.num_features())), n);
      l.train = std::move(a);
      l.test = std::move(b);
    } else {
      l.train = max_abs_scaled(l.train);
    }
  }
  const LabelConvention conv = convention_for(o, kind, l.synthetic);
  l.train = convert_labels(std::move(l.train), conv);
  if (l.test) l.test = convert_labels(std::move(*l.test), conv);
  return l;
}

Hyperparams hyperparams(const Options& o) { return {o.alpha, o.lambda}; }

ParallelConfig parallel_config(const Options& o) {
  ParallelConfig c;
  c.threads = o.threads;
  c.block_size = o.block_size;
  c.k = o.k;
  c.passes = o.passes;
  c.seed = o.seed;
  c.freq_sample = o.freq_sample;
  c.freq_threshold = o.freq_threshold;
  c.exact_combiner = o.exact_combiner;
  c.projection = o.projection == "gaussian" ? ProjectionKind::Gaussian : ProjectionKind::Sparse;
  c.reuse_projection = o.reuse_projection;
  return c;
}

json seeds_json(const Options& o, const Loaded& l) {
  json s = {{"seed", o.seed}};
  if (l.synthetic) s["data_seed"] = o.gen_seed;
  return s;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Reporter {
 public:
  Reporter(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InvalidInput("cannot write " + path);
      os_ = file_.get();
    }
  }
  void write(const json& j) { *os_ << j.dump() << '\n'; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

json run_record(const Options& o, Algorithm algo, LearnerKind kind, const ParallelConfig& cfg,
                const Hyperparams& hp, const Loaded& l) {
  return {{"algo", to_string(algo)},
          {"learner", to_string(kind)},
          {"threads", cfg.threads},
          {"block_size", cfg.block_size},
          {"k", cfg.exact_combiner ? json("identity") : json(cfg.k)},
          {"alpha", hp.alpha},
          {"lambda", hp.lambda},
          {"seeds", seeds_json(o, l)}};
}

void write_passes(Reporter& rep, json base, const TrainReport& r, std::optional<std::size_t> run) {
  const std::string sum = model_checksum(r.final_model);
  for (std::size_t p = 0; p < r.pass_loss.size(); ++p) {
    json j = base;
    j["type"] = "pass";
    if (run) j["run"] = *run;
    j["pass"] = p + 1;
    j["seconds"] = r.pass_seconds[p];
    j["loss"] = num(r.pass_loss[p]);
    j["auc"] = num(r.pass_auc[p]);
    j["model_checksum"] = p + 1 == r.pass_loss.size() ? json(sum) : json(nullptr);
    rep.write(j);
  }
}

double total_seconds(const TrainReport& r) {
  double s = 0.0;
  for (double t : r.pass_seconds) s += t;
  return s;
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const LearnerKind kind = parse_learner(o.learner);
  const Algorithm algo = parse_algorithm(o.algo);
  const Loaded l = load_data(o, kind);
  const Hyperparams hp = hyperparams(o);
  const ParallelConfig cfg = parallel_config(o);
  Reporter rep(o.out, out);
  const TrainReport r = train(algo, l.train, kind, hp, cfg, l.test ? &*l.test : nullptr);
  write_passes(rep, run_record(o, algo, kind, cfg, hp, l), r, std::nullopt);
  err << to_string(algo) << " " << to_string(kind) << ": " << r.pass_loss.size() << " passes, "
      << fmt(total_seconds(r)) << " s, loss " << fmt(r.pass_loss.back());
  if (is_classifier(kind)) err << ", auc " << fmt(r.pass_auc.back());
  err << ", checksum " << model_checksum(r.final_model) << "\n";
  return exit_code::kOk;
}

std::vector<Algorithm> parse_algorithm_list(const std::string& s) {
  std::vector<Algorithm> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") {
      out.insert(out.end(), {Algorithm::Hogwild, Algorithm::MrSymSgd, Algorithm::AsyncSymSgd});
    } else if (!item.empty()) {
      out.push_back(parse_algorithm(item));
    }
  }
  if (out.empty()) throw InvalidArgument("no algorithm given");
  return out;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.repeat == 0) throw InvalidArgument("repeat must be at least 1");
  const LearnerKind kind = parse_learner(o.learner);
  std::vector<Algorithm> algos = parse_algorithm_list(o.algo);
  algos.erase(std::remove(algos.begin(), algos.end(), Algorithm::Sequential), algos.end());
  algos.insert(algos.begin(), Algorithm::Sequential);
  const Loaded l = load_data(o, kind);
  const Hyperparams hp = hyperparams(o);
  Reporter rep(o.out, out);
  double base_seconds = 0.0;
  err << std::left << std::setw(14) << "algo" << std::setw(8) << "threads" << std::setw(14)
      << "seconds" << std::setw(10) << "speedup" << std::setw(12) << "loss" << std::setw(12)
      << "auc" << "checksum\n";
  for (Algorithm algo : algos) {
    ParallelConfig cfg = parallel_config(o);
    if (algo == Algorithm::Sequential) cfg.threads = 1;
    const json base = run_record(o, algo, kind, cfg, hp, l);
    double secs = 0.0;
    TrainReport last;
    // Every repeat uses the same seed: timings compare identical shuffles.
    for (std::size_t r = 0; r < o.repeat; ++r) {
      last = train(algo, l.train, kind, hp, cfg, l.test ? &*l.test : nullptr);
      write_passes(rep, base, last, r + 1);
      secs += total_seconds(last);
    }
    secs /= static_cast<double>(o.repeat);
    if (algo == Algorithm::Sequential) base_seconds = secs;
    const double speedup = secs > 0.0 ? base_seconds / secs : std::numeric_limits<double>::quiet_NaN();
    json s = base;
    s["type"] = "bench";
    s["repeat"] = o.repeat;
    s["mean_seconds"] = secs;
    s["speedup"] = num(speedup);
    s["loss"] = num(last.pass_loss.back());
    s["auc"] = num(last.pass_auc.back());
    s["model_checksum"] = model_checksum(last.final_model);
    rep.write(s);
    err << std::left << std::setw(14) << to_string(algo) << std::setw(8) << cfg.threads
        << std::setw(14) << fmt(secs) << std::setw(10) << fmt(speedup, 3) << std::setw(12)
        << fmt(last.pass_loss.back()) << std::setw(12) << fmt(last.pass_auc.back())
        << model_checksum(last.final_model) << "\n";
  }
  return exit_code::kOk;
}

std::vector<double> parse_list(const std::string& key, const std::string& csv) {
  std::vector<double> v;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("bad value '" + item + "' for grid key " + key);
    }
  }
  if (v.empty()) throw InvalidArgument("grid key " + key + " has no values");
  return v;
}

struct Grid {
  std::vector<double> alpha;
  std::vector<std::size_t> block_size, k;
};

Grid parse_grid(const Options& o) {
  Grid g{{o.alpha}, {o.block_size}, {o.k}};
  for (const std::string& spec : o.grid) {
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ';')) {
      if (part.empty()) continue;
      const auto eq = part.find('=');
      if (eq == std::string::npos) throw InvalidArgument("grid entries look like key=v1,v2");
      std::string key = part.substr(0, eq);
      const auto vals = parse_list(key, part.substr(eq + 1));
      auto to_sizes = [&] {
        std::vector<std::size_t> s;
        for (double v : vals) {
          if (v < 1 || v != std::floor(v)) throw InvalidArgument("grid key " + key + " needs positive integers");
          s.push_back(static_cast<std::size_t>(v));
        }
        return s;
      };
      if (key == "alpha") g.alpha = vals;
      else if (key == "block_size" || key == "block-size" || key == "b") g.block_size = to_sizes();
      else if (key == "k" || key == "proj_dim" || key == "proj-dim") g.k = to_sizes();
      else throw InvalidArgument("unknown grid key '" + key + "'");
    }
  }
  return g;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const LearnerKind kind = parse_learner(o.learner);
  const Algorithm algo = parse_algorithm(o.algo);
  const Grid grid = parse_grid(o);
  const Loaded l = load_data(o, kind);
  const Dataset* eval = l.test ? &*l.test : nullptr;
  const bool cls = is_classifier(kind);
  Reporter rep(o.out, out);
  auto metric = [&](const TrainReport& r) { return cls ? r.pass_auc.back() : r.pass_loss.back(); };

  std::vector<SweepRow> refs, rows;
  std::vector<json> row_records;
  for (double a : grid.alpha) {
    Options oa = o;
    oa.alpha = a;
    const Hyperparams hp = hyperparams(oa);
    ParallelConfig cfg = parallel_config(oa);
    cfg.threads = 1;
    const TrainReport r = train_sequential(l.train, kind, hp, cfg, eval);
    refs.push_back({a, 0, 0, metric(r), total_seconds(r)});
    json j = run_record(oa, Algorithm::Sequential, kind, cfg, hp, l);
    j["type"] = "sweep_reference";
    j["passes"] = cfg.passes;
    j["seconds"] = total_seconds(r);
    j["loss"] = num(r.pass_loss.back());
    j["auc"] = num(r.pass_auc.back());
    j["model_checksum"] = model_checksum(r.final_model);
    rep.write(j);
    if (algo == Algorithm::Sequential) {
      rows.push_back(refs.back());
      row_records.push_back(j);
      continue;
    }
    for (std::size_t b : grid.block_size) {
      for (std::size_t k : grid.k) {
        Options og = oa;
        og.block_size = b;
        og.k = k;
        const ParallelConfig pc = parallel_config(og);
        const TrainReport t = train(algo, l.train, kind, hp, pc, eval);
        rows.push_back({a, b, k, metric(t), total_seconds(t)});
        json rj = run_record(og, algo, kind, pc, hp, l);
        rj["type"] = "sweep";
        rj["passes"] = pc.passes;
        rj["seconds"] = total_seconds(t);
        rj["loss"] = num(t.pass_loss.back());
        rj["auc"] = num(t.pass_auc.back());
        rj["reference_metric"] = num(refs.back().metric);
        rj["model_checksum"] = model_checksum(t.final_model);
        rep.write(rj);
        row_records.push_back(rj);
      }
    }
  }
  const std::size_t pick = select_sweep_row(rows, refs, cls);
  json sel = row_records[pick];
  sel["type"] = "sweep_selected";
  rep.write(sel);
  err << "sweep over " << rows.size() << " configurations; selected alpha " << rows[pick].alpha;
  if (algo != Algorithm::Sequential) err << ", block " << rows[pick].block_size << ", k " << rows[pick].k;
  err << " (" << (cls ? "auc " : "loss ") << fmt(rows[pick].metric) << ", " << fmt(rows[pick].seconds)
      << " s)\n";
  return exit_code::kOk;
}

DenseVector random_direction(std::size_t f, double norm, std::uint64_t seed) {
  Rng rng(seed);
  DenseVector v(f);
  for (double& e : v) e = rng.normal();
  const double n = norm2(v);
  for (double& e : v) e *= norm / n;
  return v;
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> kinds = {"spectra", "unbiasedness", "trace", "taylor"};
  std::vector<std::string> todo;
  if (o.analysis == "all") todo = kinds;
  else if (o.analysis == "spectrum") todo = {"spectra"};
  else if (std::find(kinds.begin(), kinds.end(), o.analysis) != kinds.end()) todo = {o.analysis};
  else throw InvalidArgument("unknown analysis '" + o.analysis + "'");

  const LearnerKind kind = parse_learner(o.learner);
  const Hyperparams hp = hyperparams(o);
  Reporter rep(o.out, out);
  std::optional<Loaded> loaded;
  auto data = [&]() -> const Dataset& {
    if (!loaded) {
      Options od = o;
      if (od.data.empty()) od.gen_features = o.dim;
      loaded = load_data(od, kind);
    }
    return loaded->train;
  };
  auto prefix = [&](std::size_t n) {
    const Dataset& d = data();
    n = std::min(n, d.num_examples());
    return Dataset(std::vector<Example>(d.examples().begin(), d.examples().begin() + n),
                   d.num_features());
  };
  auto trials = [&](std::size_t dflt) { return o.trials ? o.trials : dflt; };

  for (const std::string& a : todo) {
    if (a == "spectra") {
      std::vector<std::size_t> blocks = o.grid.empty() ? std::vector<std::size_t>{64, 128, 256, 512}
                                                       : parse_grid(o).block_size;
      const Dataset& d = data();
      for (std::size_t& b : blocks) b = std::min(b, d.num_examples());
      const DenseVector w0(d.num_features(), 0.0);
      const auto reports = block_spectra(d, kind, hp, w0, blocks);
      for (const SpectrumReport& r : reports) {
        double mean_n = 0.0;
        for (double s : r.singular_values_N) mean_n += s;
        mean_n /= static_cast<double>(r.singular_values_N.size());
        rep.write({{"type", "spectrum"},
                   {"learner", to_string(kind)},
                   {"alpha", r.alpha},
                   {"block_size", r.n_examples},
                   {"sigma_max", r.singular_values.front()},
                   {"sigma_min", r.singular_values.back()},
                   {"mean_sigma_N", mean_n},
                   {"singular_values", r.singular_values},
                   {"singular_values_N", r.singular_values_N}});
        err << "spectrum b=" << r.n_examples << ": sigma(M) in [" << fmt(r.singular_values.back())
            << ", " << fmt(r.singular_values.front()) << "], mean sigma(N) " << fmt(mean_n) << "\n";
      }
    } else if (a == "unbiasedness") {
      const std::size_t t = trials(100000);
      const double dev = projection_unbiasedness(o.dim, o.k, t, o.seed, parallel_config(o).projection);
      rep.write({{"type", "unbiasedness"}, {"f", o.dim}, {"k", o.k}, {"trials", t},
                 {"max_deviation", dev}, {"clt_tolerance", 4.0 / std::sqrt(static_cast<double>(t))}});
      err << "unbiasedness f=" << o.dim << " k=" << o.k << " trials=" << t << ": max deviation "
          << fmt(dev) << "\n";
    } else if (a == "trace") {
      const Dataset d = prefix(o.block_size);
      if (d.num_features() > 128) throw InvalidArgument("trace analysis needs at most 128 features");
      const Matrix m = dense_combiner(d, kind, hp, DenseVector(d.num_features(), 0.0));
      const DenseVector dw = random_direction(d.num_features(), 1.0, derive_seed(o.seed, {7}));
      const std::size_t t = trials(10000);
      const VarianceReport r = covariance_trace_mc(m, dw, o.k, t, o.seed, parallel_config(o).projection);
      rep.write({{"type", "trace"}, {"f", d.num_features()}, {"k", r.k}, {"trials", r.trials},
                 {"examples", d.num_examples()}, {"mc_trace", r.mc_trace}, {"lower_bound", r.lower_bound},
                 {"upper_bound", r.upper_bound}, {"exact_trace", r.exact_trace}});
      err << "trace: mc " << fmt(r.mc_trace) << " within bounds [" << fmt(r.lower_bound) << ", "
          << fmt(r.upper_bound) << "]\n";
    } else {
      const Dataset d = prefix(o.block_size);
      if (d.num_features() > 128) throw InvalidArgument("taylor analysis needs at most 128 features");
      const DenseVector w = sgd_run(d, kind, hp, DenseVector(d.num_features(), 0.0));
      const DenseVector dw = random_direction(d.num_features(), o.delta, derive_seed(o.seed, {11}));
      const std::size_t t = trials(10000);
      const TaylorErrorReport r = taylor_error(d, kind, hp, w, dw, o.k, t, o.seed);
      json sr = json::object();
      for (const auto& [s, v] : r.sr_norm_at) sr[fmt(s)] = v;
      rep.write({{"type", "taylor"}, {"learner", to_string(kind)}, {"f", d.num_features()},
                 {"examples", d.num_examples()}, {"delta_norm", o.delta}, {"k", o.k}, {"trials", t},
                 {"fr_mean_norm", r.fr_mean_norm}, {"fr_second_moment", r.fr_second_moment},
                 {"sr_norm_at", sr}});
      err << "taylor: fr mean " << fmt(r.fr_mean_norm) << ", sr";
      for (const auto& [s, v] : r.sr_norm_at) err << " @" << s << "=" << fmt(v);
      err << "\n";
    }
  }
  return exit_code::kOk;
}

int cmd_stats(const Options& o, std::ostream& out, std::ostream& err) {
  const Loaded l = load_data(o, parse_learner(o.learner));
  const auto freq = detect_frequent_features(l.train, parallel_config(o));
  const DatasetStats s = dataset_stats(l.train, freq);
  Reporter rep(o.out, out);
  rep.write({{"type", "stats"}, {"num_features", s.num_features}, {"num_examples", s.num_examples},
             {"avg_nnz", s.avg_nnz}, {"avg_nfnz_ratio", s.avg_nfnz_ratio},
             {"frequent_features", freq.size()}, {"freq_threshold", o.freq_threshold},
             {"freq_sample", o.freq_sample}, {"seeds", seeds_json(o, l)}});
  err << s.num_examples << " examples, " << s.num_features << " features, avg nnz "
      << fmt(s.avg_nnz) << ", " << freq.size() << " frequent, avg NFNZ ratio "
      << fmt(s.avg_nfnz_ratio) << "\n";
  return exit_code::kOk;
}

int cmd_gen(const Options& o, std::ostream& out, std::ostream& err) {
  const SyntheticData s = generate_synthetic(synthetic_spec(o, parse_learner(o.learner)));
  const LabelConvention conv = convention_for(o, parse_learner(o.learner), false);
  const Dataset d = convert_labels(s.data, conv);
  if (o.out.empty()) write_libsvm(out, d);
  else save_libsvm(o.out, d);
  err << "wrote " << d.num_examples() << " examples over " << d.num_features() << " features\n";
  return exit_code::kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Parallel SGD with sound model combiners"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand help for all subcommands");

  CLI::App* train_cmd = app.add_subcommand("train", "train one model and report each pass");
  CLI::App* bench_cmd = app.add_subcommand("bench", "time algorithms against the sequential baseline");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid over alpha, block size and k");
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "combiner and projection diagnostics");
  CLI::App* stats_cmd = app.add_subcommand("stats", "dataset and frequent-feature statistics");
  CLI::App* gen_cmd = app.add_subcommand("gen", "write a synthetic dataset in LibSVM format");

  for (CLI::App* c : {train_cmd, bench_cmd, sweep_cmd, analyze_cmd, stats_cmd, gen_cmd}) {
    add_data_options(c, o);
    add_learner_options(c, o);
    add(c, "--out", o.out, "output path (records, or data for gen)");
  }
  for (CLI::App* c : {train_cmd, bench_cmd, sweep_cmd, analyze_cmd, stats_cmd}) add_parallel_options(c, o);
  add(bench_cmd, "--repeat", o.repeat, "timing repetitions")->check(CLI::PositiveNumber);
  add(sweep_cmd, "--grid", o.grid, "axis values, e.g. alpha=0.001,0.01;block_size=64,256;k=7,15");
  add(analyze_cmd, "--grid", o.grid, "block_size=... for spectra");
  add(analyze_cmd, "--analysis", o.analysis, "spectra, unbiasedness, trace, taylor or all");
  add(analyze_cmd, "--dim", o.dim, "synthetic feature count for analyses");
  add(analyze_cmd, "--trials", o.trials, "Monte-Carlo trials (0 picks a default)");
  add(analyze_cmd, "--delta", o.delta, "norm of the model delta for taylor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? exit_code::kOk : exit_code::kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(o, out, err);
    if (*bench_cmd) return cmd_bench(o, out, err);
    if (*sweep_cmd) return cmd_sweep(o, out, err);
    if (*analyze_cmd) return cmd_analyze(o, out, err);
    if (*stats_cmd) return cmd_stats(o, out, err);
    if (*gen_cmd) return cmd_gen(o, out, err);
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << "\n";
    return exit_code::kData;
  } catch (const InvalidInput& e) {
    err << "data error: " << e.what() << "\n";
    return exit_code::kData;
  } catch (const InvalidLabel& e) {
    err << "data error: " << e.what() << "\n";
    return exit_code::kData;
  } catch (const DimensionMismatch& e) {
    err << "data error: " << e.what() << "\n";
    return exit_code::kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kRuntime;
  }
  return exit_code::kUsage;
}

}  // namespace symsgd
