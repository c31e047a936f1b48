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

#include "qoesign/service/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <memory>

#include "json.hpp"
#include "qoesign/crypto.hpp"
#include "qoesign/errors.hpp"
#include "qoesign/protocol/local_cluster.hpp"

namespace qoesign::service {

namespace {

std::uint32_t parse_u32(std::string_view s, const char* what) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::Validation, std::string(what) + ": expected a number, got '" + std::string(s) + "'",
                {what});
  }
  return v;
}

}  // namespace

std::uint32_t resolve_threshold(const std::string& spec, std::uint32_t n) {
  std::uint32_t t = spec == "majority" ? n / 2 + 1 : parse_u32(spec, "t");
  if (t < 1 || t > n) {
    throw Error(ErrorCode::Validation, "t=" + std::to_string(t) + " is outside 1.." + std::to_string(n), {"t"});
  }
  return t;
}

std::pair<std::uint32_t, std::uint32_t> parse_n_range(const std::string& spec) {
  auto dots = spec.find("..");
  std::uint32_t lo = parse_u32(spec.substr(0, dots), "n-range");
  std::uint32_t hi = dots == std::string::npos ? lo : parse_u32(spec.substr(dots + 2), "n-range");
  if (lo < 1 || lo > hi || hi > 16) {
    throw Error(ErrorCode::Validation, "n-range must satisfy 1 <= lo <= hi <= 16", {"n-range"});
  }
  return {lo, hi};
}

std::vector<BenchRow> run_bench(const BenchOptions& o) {
  if (o.iterations == 0) throw Error(ErrorCode::Validation, "iterations must be positive", {"iterations"});
  SuiteRegistry registry = make_default_registry();
  struct Run {
    std::uint32_t n = 0;
    std::uint32_t t = 0;
    std::unique_ptr<ledger::SigningLedger> ledger;
    std::unique_ptr<protocol::LocalCluster> cluster;
    std::vector<double> ms;
  };
  std::vector<Run> runs;
  for (std::uint32_t n = o.n_min; n <= o.n_max; ++n) {
    Run r;
    r.n = n;
    r.t = resolve_threshold(o.t, n);
    r.ledger = std::make_unique<ledger::SigningLedger>("bench", std::make_unique<ledger::MemoryLedgerStore>());
    r.cluster = std::make_unique<protocol::LocalCluster>(
        registry, protocol::LocalCluster::Options{{r.t, n, true}, o.suite_id, o.seed}, *r.ledger);
    // One untimed session warms caches and lazy initialization.
    r.cluster->sign(crypto::sha256(as_bytes("bench/warmup/" + std::to_string(n))));
    runs.push_back(std::move(r));
  }
  // Iterations are interleaved across n so transient load hits every row alike.
  for (std::uint32_t i = 0; i < o.iterations; ++i) {
    for (auto& r : runs) {
      Hash32 msg = crypto::sha256(as_bytes("bench/" + std::to_string(r.n) + "/" + std::to_string(i)));
      auto start = std::chrono::steady_clock::now();
      auto session = r.cluster->sign(msg);
      auto stop = std::chrono::steady_clock::now();
      if (session.state() != protocol::SessionState::Completed) {
        throw Error(ErrorCode::ProtocolViolation, "benchmark session did not complete at n=" + std::to_string(r.n));
      }
      r.ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
  }
  std::vector<BenchRow> rows;
  for (auto& r : runs) {
    std::sort(r.ms.begin(), r.ms.end());
    std::size_t k = r.ms.size();
    double median = k % 2 == 1 ? r.ms[k / 2] : (r.ms[k / 2 - 1] + r.ms[k / 2]) / 2;
    rows.push_back({r.n, r.t, o.iterations, median, r.ms.front(), r.ms.back()});
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::string out = "  n   t  iterations   median_ms      min_ms      max_ms\n";
  char line[128];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%3u %3u %11u %11.3f %11.3f %11.3f\n", r.n, r.t, r.iterations, r.median_ms,
                  r.min_ms, r.max_ms);
    out += line;
  }
  return out;
}

std::string bench_json(const std::vector<BenchRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["t"] = r.t;
    j["iterations"] = r.iterations;
    j["median_ms"] = r.median_ms;
    j["min_ms"] = r.min_ms;
    j["max_ms"] = r.max_ms;
    arr.push_back(j);
  }
  return arr.dump();
}

}  // namespace qoesign::service
