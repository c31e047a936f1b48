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
#include <span>
#include <vector>

#include "qoesign/group/group.hpp"
#include "qoesign/random.hpp"

namespace qoesign {

// One evaluation point of a sharing polynomial. Index 0 is reserved for the
// secret and never appears in a Share.
struct Share {
  std::uint32_t index = 0;
  FieldElement value;

  bool operator==(const Share&) const = default;
};

// Coefficients in ascending degree order; coefficients[0] is the constant term.
class Polynomial {
 public:
  explicit Polynomial(std::vector<FieldElement> coefficients);

  // Constant term `constant`, `degree` further coefficients drawn from `rng`
  // in ascending order.
  static Polynomial random(const FieldElement& constant, std::size_t degree, RandomSource& rng);

  FieldElement evaluate(std::uint64_t x) const;
  const std::vector<FieldElement>& coefficients() const { return coefficients_; }
  std::size_t degree() const { return coefficients_.size() - 1; }

 private:
  std::vector<FieldElement> coefficients_;
};

// Shares at points 1..n of a random degree-(t-1) polynomial through `secret`.
std::vector<Share> shamir_split(const FieldElement& secret, std::size_t t, std::size_t n, RandomSource& rng);

// Shares at points 1..n of a given polynomial.
std::vector<Share> shamir_split(const Polynomial& polynomial, std::size_t n);

// Interpolates at 0 using the first t shares. Throws Reconstruction on
// duplicate indices or fewer than t shares.
FieldElement shamir_reconstruct(std::span<const Share> shares, std::size_t t);

// lambda_i = prod_{j != i} j / (j - i) mod q.
FieldElement lagrange_coefficient(std::span<const std::uint32_t> indices, std::uint32_t i, const BigInt& q);

// Feldman commitments A_k = g^{a_k}.
std::vector<Element> feldman_commit(std::span<const FieldElement> coefficients, const Group& group);

// prod_k A_k^{i^k}: the public image g^{f(i)} of share i.
Element feldman_public_share(const Group& group, std::uint32_t index, std::span<const Element> commitments);

// Accepts iff g^share == prod_k A_k^{i^k}.
bool feldman_verify(const Group& group, const Share& share, std::span<const Element> commitments);

}  // namespace qoesign
