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

#include "qoesign/group/field.hpp"

#include <boost/multiprecision/integer.hpp>

namespace qoesign {

BigInt big_from_be(ByteView bytes) {
  BigInt out = 0;
  for (auto b : bytes) {
    out <<= 8;
    out |= b;
  }
  return out;
}

Bytes big_to_be(const BigInt& value, std::size_t length) {
  if (value < 0) throw Error(ErrorCode::Parameter, "cannot encode a negative integer");
  Bytes out(length, 0);
  BigInt v = value;
  for (std::size_t i = 0; i < length; ++i) {
    out[length - 1 - i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  if (v != 0) throw Error(ErrorCode::Parameter, "integer does not fit in " + std::to_string(length) + " bytes");
  return out;
}

BigInt big_from_hex(std::string_view hex) { return big_from_be(from_hex(hex)); }

std::string big_to_string(const BigInt& value) { return value.str(); }

BigInt mod_pow(const BigInt& base, const BigInt& exponent, const BigInt& modulus) {
  return boost::multiprecision::powm(base, exponent, modulus);
}

FieldElement::FieldElement(BigInt value, BigInt modulus) : modulus_(std::move(modulus)) {
  if (modulus_ < 2) throw Error(ErrorCode::Parameter, "field modulus must be at least 2");
  value_ = value % modulus_;
  if (value_ < 0) value_ += modulus_;
}

void FieldElement::require_same_field(const FieldElement& rhs) const {
  if (modulus_ != rhs.modulus_) throw Error(ErrorCode::Parameter, "field elements from different moduli");
}

FieldElement FieldElement::operator+(const FieldElement& rhs) const {
  require_same_field(rhs);
  return {value_ + rhs.value_, modulus_};
}

FieldElement FieldElement::operator-(const FieldElement& rhs) const {
  require_same_field(rhs);
  return {value_ - rhs.value_, modulus_};
}

FieldElement FieldElement::operator*(const FieldElement& rhs) const {
  require_same_field(rhs);
  return {value_ * rhs.value_, modulus_};
}

FieldElement FieldElement::operator-() const { return {-value_, modulus_}; }

FieldElement FieldElement::inverse() const {
  if (is_zero()) throw Error(ErrorCode::Parameter, "zero has no inverse");
  // q is prime, so a^(q-2) is the inverse.
  return {mod_pow(value_, modulus_ - 2, modulus_), modulus_};
}

FieldElement FieldElement::pow(const BigInt& exponent) const { return {mod_pow(value_, exponent, modulus_), modulus_}; }

FieldElement FieldElement::decode(ByteView bytes, const BigInt& modulus) {
  BigInt v = big_from_be(bytes);
  if (v >= modulus) throw Error(ErrorCode::Decode, "scalar encoding is not reduced");
  return {std::move(v), modulus};
}

}  // namespace qoesign
