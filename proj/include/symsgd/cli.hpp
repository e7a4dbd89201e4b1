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
#include <iosfwd>
#include <span>
#include <string>

namespace symsgd {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kData = 3;
inline constexpr int kRuntime = 4;
}  // namespace exit_code

// Subcommands: train, bench, sweep, analyze, stats, gen. Structured records
// (one JSON object per line) go to --out or `out`; the human-readable
// summary goes to `err`. Every flag can also be set through an environment
// variable SYMSGD_<FLAG>, e.g. SYMSGD_BLOCK_SIZE=512.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a over the IEEE-754 bit patterns of w, as 16 hex digits.
std::string model_checksum(std::span<const double> w);

struct SweepRow {
  double alpha = 0.0;
  std::size_t block_size = 0;
  std::size_t k = 0;
  double metric = 0.0;  // AUC, or loss for regression learners
  double seconds = 0.0;
};

// AUC "equal up to the fourth digit".
inline constexpr double kAucWindow = 5e-5;

// Picks the reported configuration. The learning rate is the one whose
// sequential reference scores best; among rows at that rate whose metric is
// within the window of the reference (absolute for AUC, relative for loss),
// the fastest wins, ties going to the smaller k and then the larger block.
// If none qualifies the closest row is taken. Returns an index into `rows`;
// `references` holds one sequential row per learning rate.
std::size_t select_sweep_row(std::span<const SweepRow> rows, std::span<const SweepRow> references,
                             bool higher_is_better);

}  // namespace symsgd
