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

#include "qoesign/random.hpp"

#include <boost/multiprecision/integer.hpp>

#include "qoesign/crypto.hpp"

namespace qoesign {

FieldElement RandomSource::draw_scalar(const BigInt& q, bool nonzero) {
  const std::size_t bits = boost::multiprecision::msb(q) + 1;
  const std::size_t bytes = (bits + 7) / 8;
  const std::size_t excess = bytes * 8 - bits;
  Bytes buf(bytes);
  // Rejection sampling over the smallest covering bit length.
  for (;;) {
    fill(buf);
    buf[0] &= static_cast<std::uint8_t>(0xff >> excess);
    BigInt v = big_from_be(buf);
    if (v >= q) continue;
    if (nonzero && v == 0) continue;
    return {std::move(v), q};
  }
}

SeededRandom::SeededRandom(std::uint64_t seed, std::string_view label) {
  ByteWriter w;
  w.u64(seed).lp32(as_bytes(label));
  key_.fill(0x00);
  value_.fill(0x01);
  update(w.bytes());
}

SeededRandom::SeededRandom(ByteView seed_material) {
  key_.fill(0x00);
  value_.fill(0x01);
  update(seed_material);
}

void SeededRandom::update(ByteView provided) {
  for (std::uint8_t round = 0; round < 2; ++round) {
    Bytes msg(value_.begin(), value_.end());
    msg.push_back(round);
    msg.insert(msg.end(), provided.begin(), provided.end());
    key_ = crypto::hmac_sha256(key_, msg);
    value_ = crypto::hmac_sha256(key_, value_);
    if (provided.empty()) break;
  }
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    value_ = crypto::hmac_sha256(key_, value_);
    std::size_t take = std::min(out.size() - pos, value_.size());
    std::copy_n(value_.begin(), take, out.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += take;
  }
  update({});
}

void SystemRandom::fill(std::span<std::uint8_t> out) { crypto::random_bytes(out); }

}  // namespace qoesign
