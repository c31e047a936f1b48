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

#include <memory>

#include "qoesign/group/group.hpp"

namespace qoesign {

Bytes Group::encode_scalar(const FieldElement& k) const {
  if (k.modulus() != order()) throw Error(ErrorCode::Parameter, "scalar is not in this group's field");
  return k.encode(scalar_size());
}

FieldElement Group::decode_scalar(ByteView bytes) const {
  if (bytes.size() != scalar_size()) throw Error(ErrorCode::Decode, "scalar has wrong length");
  return FieldElement::decode(bytes, order());
}

namespace {

class ToyGroup final : public Group {
 public:
  ToyGroup() : id_("toy-23-11"), p_(23), q_(11), g_(2) {}

  const std::string& id() const override { return id_; }
  const BigInt& order() const override { return q_big_; }
  std::size_t element_size() const override { return 4; }
  std::size_t scalar_size() const override { return 2; }

  Element generator() const override { return make(g_); }
  Element identity() const override { return make(1); }

  Element op(const Element& a, const Element& b) const override { return make((value(a) * value(b)) % p_); }

  Element exp(const Element& base, const FieldElement& k) const override {
    if (k.modulus() != q_big_) throw Error(ErrorCode::Parameter, "exponent is not in this group's field");
    std::uint64_t result = 1;
    std::uint64_t b = value(base);
    auto e = static_cast<std::uint64_t>(k.value());
    while (e > 0) {
      if (e & 1) result = (result * b) % p_;
      b = (b * b) % p_;
      e >>= 1;
    }
    return make(result);
  }

  Element decode(ByteView bytes) const override {
    if (bytes.size() != 4) throw Error(ErrorCode::Decode, "toy element must be 4 bytes");
    std::uint64_t v = (std::uint64_t{bytes[0]} << 24) | (std::uint64_t{bytes[1]} << 16) |
                      (std::uint64_t{bytes[2]} << 8) | std::uint64_t{bytes[3]};
    if (v == 0 || v >= p_) throw Error(ErrorCode::Decode, "toy element out of range");
    // Subgroup membership: v^q == 1.
    std::uint64_t acc = 1;
    for (std::uint64_t i = 0; i < q_; ++i) acc = (acc * v) % p_;
    if (acc != 1) throw Error(ErrorCode::Decode, "toy element outside the order-11 subgroup");
    return make(v);
  }

 private:
  std::uint64_t value(const Element& e) const {
    if (e.encoding.size() != 4) throw Error(ErrorCode::Parameter, "element is not a toy-group element");
    return (std::uint64_t{e.encoding[0]} << 24) | (std::uint64_t{e.encoding[1]} << 16) |
           (std::uint64_t{e.encoding[2]} << 8) | std::uint64_t{e.encoding[3]};
  }

  static Element make(std::uint64_t v) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(v));
    return Element{std::move(w).take()};
  }

  std::string id_;
  std::uint64_t p_;
  std::uint64_t q_;
  std::uint64_t g_;
  BigInt q_big_{11};
};

}  // namespace

GroupPtr toy_group() {
  static const GroupPtr instance = std::make_shared<ToyGroup>();
  return instance;
}

GroupPtr group_by_id(std::string_view id) {
  if (id == "toy-23-11") return toy_group();
  if (id == "p256") return p256_group();
  throw Error(ErrorCode::NotFound, "unknown group id: " + std::string(id));
}

}  // namespace qoesign
