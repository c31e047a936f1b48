// Copyright 2026 The QoeSiGN Authors
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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qoesign::service {

// Threshold for each n: "majority" gives floor(n/2)+1, a number gives itself.
std::uint32_t resolve_threshold(const std::string& spec, std::uint32_t n);
// "3..7" or "5"; Validation unless 1 <= lo <= hi <= 16.
std::pair<std::uint32_t, std::uint32_t> parse_n_range(const std::string& spec);

struct BenchOptions {
  std::uint32_t n_min = 3;
  std::uint32_t n_max = 5;
  std::string t = "majority";
  std::uint32_t iterations = 10;
  std::string suite_id = "schnorr-prod-v1";
  std::uint64_t seed = 1;
};

// Wall-clock cost of one full session (approval through aggregation and the
// ledger append) with every party in this process.
struct BenchRow {
  std::uint32_t n = 0;
  std::uint32_t t = 0;
  std::uint32_t iterations = 0;
  double median_ms = 0;
  double min_ms = 0;
  double max_ms = 0;
};

std::vector<BenchRow> run_bench(const BenchOptions& options);
std::string bench_table(const std::vector<BenchRow>& rows);
std::string bench_json(const std::vector<BenchRow>& rows);

}  // namespace qoesign::service
