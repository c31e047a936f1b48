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

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "qoesign/bytes.hpp"

namespace qoesign {

// Arbitrary-precision integer. Not side-channel hardened.
using BigInt = boost::multiprecision::cpp_int;

BigInt big_from_be(ByteView bytes);
// Fixed-length big-endian encoding; throws when the value does not fit.
Bytes big_to_be(const BigInt& value, std::size_t length);
BigInt big_from_hex(std::string_view hex);
std::string big_to_string(const BigInt& value);

// Element of the prime field Z_q. Binary operations require equal moduli.
class FieldElement {
 public:
  FieldElement() = default;
  // Reduces `value` into [0, q), negative inputs included.
  FieldElement(BigInt value, BigInt modulus);
  FieldElement(long long value, const BigInt& modulus) : FieldElement(BigInt(value), modulus) {}

  const BigInt& value() const { return value_; }
  const BigInt& modulus() const { return modulus_; }
  bool is_zero() const { return value_ == 0; }

  FieldElement operator+(const FieldElement& rhs) const;
  FieldElement operator-(const FieldElement& rhs) const;
  FieldElement operator*(const FieldElement& rhs) const;
  FieldElement operator-() const;
  FieldElement& operator+=(const FieldElement& rhs) { return *this = *this + rhs; }
  FieldElement& operator*=(const FieldElement& rhs) { return *this = *this * rhs; }

  // Throws ErrorCode::Parameter for zero.
  FieldElement inverse() const;
  FieldElement pow(const BigInt& exponent) const;

  Bytes encode(std::size_t length) const { return big_to_be(value_, length); }
  // Rejects encodings of values >= q.
  static FieldElement decode(ByteView bytes, const BigInt& modulus);

  bool operator==(const FieldElement& rhs) const = default;

 private:
  void require_same_field(const FieldElement& rhs) const;

  BigInt value_;
  BigInt modulus_;
};

BigInt mod_pow(const BigInt& base, const BigInt& exponent, const BigInt& modulus);

}  // namespace qoesign
