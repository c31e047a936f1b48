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
#include <string_view>

#include "qoesign/group/field.hpp"

namespace qoesign {

// Source of randomness for key, nonce and polynomial generation. Every
// scalar the protocol draws goes through draw_scalar, in a documented order,
// so a run is fully determined by its sources.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  virtual void fill(std::span<std::uint8_t> out) = 0;

  // Uniform scalar in [0, q), or [1, q) when nonzero is set.
  virtual FieldElement draw_scalar(const BigInt& q, bool nonzero);
};

// HMAC-SHA256 DRBG. Identical seed and label give identical streams.
class SeededRandom final : public RandomSource {
 public:
  SeededRandom(std::uint64_t seed, std::string_view label);
  explicit SeededRandom(ByteView seed_material);

  void fill(std::span<std::uint8_t> out) override;

 private:
  void update(ByteView provided);

  Hash32 key_{};
  Hash32 value_{};
};

// Operating-system entropy.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

}  // namespace qoesign
