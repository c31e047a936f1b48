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

#include <memory>
#include <string>

#include "qoesign/group/field.hpp"

namespace qoesign {

// A group element held in its canonical encoding. Only the Group that
// produced it can interpret it.
struct Element {
  Bytes encoding;

  bool operator==(const Element&) const = default;
};

// Prime-order group of order q, written multiplicatively.
class Group {
 public:
  virtual ~Group() = default;

  virtual const std::string& id() const = 0;
  virtual const BigInt& order() const = 0;
  virtual std::size_t element_size() const = 0;
  virtual std::size_t scalar_size() const = 0;

  virtual Element generator() const = 0;
  virtual Element identity() const = 0;
  virtual Element op(const Element& a, const Element& b) const = 0;
  virtual Element exp(const Element& base, const FieldElement& k) const = 0;
  virtual Element exp_generator(const FieldElement& k) const { return exp(generator(), k); }
  // Accepts only canonical encodings of group members.
  virtual Element decode(ByteView bytes) const = 0;

  bool is_identity(const Element& e) const { return e == identity(); }
  const Bytes& encode(const Element& e) const { return e.encoding; }

  FieldElement scalar(const BigInt& v) const { return {v, order()}; }
  Bytes encode_scalar(const FieldElement& k) const;
  FieldElement decode_scalar(ByteView bytes) const;
};

using GroupPtr = std::shared_ptr<const Group>;

// Order-11 subgroup of Z_23^* generated by 2. Elements encode as 4-byte
// big-endian residues, scalars as 2 bytes. For exhaustive tests only.
GroupPtr toy_group();

// NIST P-256 via libcrypto. Elements encode as 33-byte compressed points;
// the identity is 33 zero bytes. Scalars are 32 bytes.
GroupPtr p256_group();

// Lookup by GroupDescription id ("toy-23-11", "p256").
GroupPtr group_by_id(std::string_view id);

}  // namespace qoesign
