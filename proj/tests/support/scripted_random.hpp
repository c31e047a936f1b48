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

#include <deque>

#include "qoesign/random.hpp"

namespace qoesign::testing {

// Replays a fixed list of scalars through draw_scalar, which is how tests
// inject polynomial coefficients and nonces. Byte-level draws (session ids,
// padding) fall through to a seeded stream.
class ScriptedRandom final : public RandomSource {
 public:
  explicit ScriptedRandom(std::initializer_list<long long> scalars, std::uint64_t seed = 7)
      : fallback_(seed, "scripted") {
    for (auto s : scalars) scalars_.emplace_back(s);
  }

  void push(const BigInt& v) { scalars_.push_back(v); }
  std::size_t remaining() const { return scalars_.size(); }

  void fill(std::span<std::uint8_t> out) override { fallback_.fill(out); }

  FieldElement draw_scalar(const BigInt& q, bool nonzero) override {
    if (scalars_.empty()) return fallback_.draw_scalar(q, nonzero);
    BigInt v = scalars_.front();
    scalars_.pop_front();
    return {v, q};
  }

 private:
  std::deque<BigInt> scalars_;
  SeededRandom fallback_;
};

}  // namespace qoesign::testing
