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

#include "symsgd/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "symsgd/error.hpp"
#include "symsgd/rng.hpp"

namespace symsgd {

namespace {

bool parse_real(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

bool parse_index(std::string_view tok, std::uint64_t& out) {
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::string read_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw InvalidInput("cannot open " + path.string());
  std::string text;
  char buf[1 << 16];
  int got;
  while ((got = gzread(f, buf, sizeof(buf))) > 0) text.append(buf, static_cast<std::size_t>(got));
  const bool failed = got < 0;
  gzclose(f);
  if (failed) throw InvalidInput("corrupt gzip stream in " + path.string());
  return text;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const ParseOptions& opts) {
  std::vector<Example> examples;
  std::size_t max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<FeatureIndex, double>> entries;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string_view rest(line);
    auto next_token = [&rest]() -> std::string_view {
      std::size_t b = 0;
      while (b < rest.size() && std::isspace(static_cast<unsigned char>(rest[b]))) ++b;
      std::size_t e = b;
      while (e < rest.size() && !std::isspace(static_cast<unsigned char>(rest[e]))) ++e;
      std::string_view tok = rest.substr(b, e - b);
      rest.remove_prefix(e);
      return tok;
    };
    std::string_view tok = next_token();
    if (tok.empty()) continue;
    Example z;
    if (!parse_real(tok, z.label)) {
      throw ParseError(lineno, "invalid label '" + std::string(tok) + "'");
    }
    entries.clear();
    while (!(tok = next_token()).empty()) {
      const auto colon = tok.find(':');
      std::uint64_t idx = 0;
      double val = 0.0;
      if (colon == std::string_view::npos || !parse_index(tok.substr(0, colon), idx) ||
          !parse_real(tok.substr(colon + 1), val)) {
        throw ParseError(lineno, "malformed feature '" + std::string(tok) + "'");
      }
      if (idx == 0 || idx > std::numeric_limits<FeatureIndex>::max()) {
        throw ParseError(lineno, "feature index out of range in '" + std::string(tok) + "'");
      }
      entries.emplace_back(static_cast<FeatureIndex>(idx - 1), val);
      max_index = std::max<std::size_t>(max_index, idx);
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t p = 1; p < entries.size(); ++p) {
      if (entries[p].first == entries[p - 1].first) {
        throw ParseError(lineno, "repeated feature index " + std::to_string(entries[p].first + 1));
      }
    }
    z.features = SparseVector(entries);
    examples.push_back(std::move(z));
  }
  if (examples.empty()) throw InvalidInput("no examples in input");
  std::size_t f = max_index;
  if (opts.num_features) {
    if (*opts.num_features < max_index) {
      throw InvalidInput("num_features " + std::to_string(*opts.num_features) +
                         " is smaller than the largest index " + std::to_string(max_index));
    }
    f = *opts.num_features;
  }
  return Dataset(std::move(examples), f);
}

Dataset load_libsvm(const std::filesystem::path& path, const ParseOptions& opts) {
  if (!std::filesystem::exists(path)) throw InvalidInput("no such file: " + path.string());
  if (path.extension() == ".gz") {
    std::istringstream in(read_gzip(path));
    return parse_libsvm(in, opts);
  }
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return parse_libsvm(in, opts);
}

void write_libsvm(std::ostream& out, const Dataset& d) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const Example& z : d.examples()) {
    out << z.label;
    const auto idx = z.features.indices();
    const auto val = z.features.values();
    for (std::size_t p = 0; p < idx.size(); ++p) out << ' ' << (idx[p] + 1) << ':' << val[p];
    out << '\n';
  }
  out.precision(old_precision);
}

void save_libsvm(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_libsvm(out, d);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_features == 0 || spec.num_examples == 0) {
    throw InvalidArgument("synthetic data needs at least one feature and one example");
  }
  if (!(spec.density > 0.0 && spec.density <= 1.0)) {
    throw InvalidArgument("density must lie in (0, 1]");
  }
  if (!(spec.hot_density > 0.0 && spec.hot_density <= 1.0)) {
    throw InvalidArgument("hot_density must lie in (0, 1]");
  }
  if (spec.noise_sd < 0.0) throw InvalidArgument("noise_sd must be non-negative");
  Rng rng(derive_seed(spec.seed, {0x5EED}));
  DenseVector w_star(spec.num_features);
  for (double& e : w_star) e = rng.normal();

  std::vector<Example> examples;
  examples.reserve(spec.num_examples);
  std::vector<std::pair<FeatureIndex, double>> entries;
  for (std::size_t n = 0; n < spec.num_examples; ++n) {
    entries.clear();
    for (std::size_t i = 0; i < spec.num_features; ++i) {
      const double p = i < spec.hot_features ? spec.hot_density : spec.density;
      if (rng.bernoulli(p)) entries.emplace_back(static_cast<FeatureIndex>(i), rng.normal());
    }
    if (spec.normalize && !entries.empty()) {
      double sq = 0.0;
      for (const auto& e : entries) sq += e.second * e.second;
      const double inv = 1.0 / std::sqrt(sq);
      for (auto& e : entries) e.second *= inv;
    }
    Example z;
    z.features = SparseVector(entries);
    const double signal = dot(z.features, w_star) + spec.noise_sd * rng.normal();
    z.label = spec.task == TaskKind::Regression ? signal : (signal > 0.0 ? 1.0 : 0.0);
    examples.push_back(std::move(z));
  }
  return {Dataset(std::move(examples), spec.num_features), std::move(w_star)};
}

LabelConvention parse_label_convention(std::string_view name) {
  if (name == "none") return LabelConvention::None;
  if (name == "01" || name == "zero-one") return LabelConvention::ZeroOne;
  if (name == "pm1" || name == "plus-minus") return LabelConvention::PlusMinus;
  throw InvalidArgument("unknown label convention '" + std::string(name) + "'");
}

Dataset convert_labels(Dataset d, LabelConvention convention) {
  if (convention == LabelConvention::None) return d;
  const double neg = convention == LabelConvention::ZeroOne ? 0.0 : -1.0;
  for (std::size_t i = 0; i < d.num_examples(); ++i) d.set_label(i, d[i].label > 0.0 ? 1.0 : neg);
  return d;
}

Dataset max_abs_scaled(const Dataset& d) {
  std::vector<double> scale(d.num_features(), 0.0);
  for (const Example& z : d.examples()) {
    const auto idx = z.features.indices();
    const auto val = z.features.values();
    for (std::size_t p = 0; p < idx.size(); ++p) scale[idx[p]] = std::max(scale[idx[p]], std::abs(val[p]));
  }
  std::vector<Example> out;
  out.reserve(d.num_examples());
  std::vector<std::pair<FeatureIndex, double>> entries;
  for (const Example& z : d.examples()) {
    entries.clear();
    const auto idx = z.features.indices();
    const auto val = z.features.values();
    for (std::size_t p = 0; p < idx.size(); ++p) entries.emplace_back(idx[p], val[p] / scale[idx[p]]);
    out.push_back({SparseVector(entries), z.label});
  }
  return Dataset(std::move(out), d.num_features());
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& d, std::size_t n_first) {
  n_first = std::min(n_first, d.num_examples());
  const auto all = d.examples();
  std::vector<Example> a(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_first));
  std::vector<Example> b(all.begin() + static_cast<std::ptrdiff_t>(n_first), all.end());
  return {Dataset(std::move(a), d.num_features()), Dataset(std::move(b), d.num_features())};
}

DatasetStats dataset_stats(const Dataset& d, std::span<const FeatureIndex> frequent) {
  DatasetStats s;
  s.num_features = d.num_features();
  s.num_examples = d.num_examples();
  if (d.empty()) return s;
  double nnz_total = 0.0;
  double ratio_total = 0.0;
  std::size_t counted = 0;
  for (const Example& z : d.examples()) {
    const auto idx = z.features.indices();
    nnz_total += static_cast<double>(idx.size());
    if (idx.empty()) continue;
    std::size_t hits = 0;
    for (FeatureIndex i : idx) {
      if (std::binary_search(frequent.begin(), frequent.end(), i)) ++hits;
    }
    ratio_total += static_cast<double>(hits) / static_cast<double>(idx.size());
    ++counted;
  }
  s.avg_nnz = nnz_total / static_cast<double>(d.num_examples());
  s.avg_nfnz_ratio = counted ? ratio_total / static_cast<double>(counted) : 0.0;
  return s;
}

}  // namespace symsgd
