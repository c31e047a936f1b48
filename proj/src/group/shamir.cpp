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

#include "qoesign/group/shamir.hpp"

#include <set>

namespace qoesign {

Polynomial::Polynomial(std::vector<FieldElement> coefficients) : coefficients_(std::move(coefficients)) {
  if (coefficients_.empty()) throw Error(ErrorCode::Parameter, "polynomial needs at least one coefficient");
  for (const auto& c : coefficients_) {
    if (c.modulus() != coefficients_.front().modulus()) {
      throw Error(ErrorCode::Parameter, "polynomial coefficients from different fields");
    }
  }
}

Polynomial Polynomial::random(const FieldElement& constant, std::size_t degree, RandomSource& rng) {
  std::vector<FieldElement> coefficients{constant};
  coefficients.reserve(degree + 1);
  for (std::size_t k = 0; k < degree; ++k) coefficients.push_back(rng.draw_scalar(constant.modulus(), false));
  return Polynomial(std::move(coefficients));
}

FieldElement Polynomial::evaluate(std::uint64_t x) const {
  const auto& q = coefficients_.front().modulus();
  FieldElement point(BigInt(x), q);
  FieldElement acc(0, q);
  // Horner from the highest degree down.
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * point + *it;
  return acc;
}

std::vector<Share> shamir_split(const FieldElement& secret, std::size_t t, std::size_t n, RandomSource& rng) {
  if (t < 1 || t > n) {
    throw Error(ErrorCode::Parameter, "threshold must satisfy 1 <= t <= n",
                {"t=" + std::to_string(t), "n=" + std::to_string(n)});
  }
  if (BigInt(n) >= secret.modulus()) throw Error(ErrorCode::Parameter, "party count must be below the field order");
  return shamir_split(Polynomial::random(secret, t - 1, rng), n);
}

std::vector<Share> shamir_split(const Polynomial& polynomial, std::size_t n) {
  if (n < polynomial.degree() + 1) throw Error(ErrorCode::Parameter, "fewer parties than the threshold");
  if (BigInt(n) >= polynomial.coefficients().front().modulus()) {
    throw Error(ErrorCode::Parameter, "party count must be below the field order");
  }
  std::vector<Share> shares;
  shares.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) shares.push_back({i, polynomial.evaluate(i)});
  return shares;
}

FieldElement lagrange_coefficient(std::span<const std::uint32_t> indices, std::uint32_t i, const BigInt& q) {
  std::set<std::uint32_t> seen;
  bool found = false;
  for (auto j : indices) {
    if (j == 0) throw Error(ErrorCode::Parameter, "evaluation index 0 is reserved for the secret");
    if (!seen.insert(j).second) throw Error(ErrorCode::Parameter, "duplicate index " + std::to_string(j));
    found = found || j == i;
  }
  if (!found) throw Error(ErrorCode::Parameter, "index " + std::to_string(i) + " is not in the participant set");

  FieldElement num(1, q);
  FieldElement den(1, q);
  for (auto j : indices) {
    if (j == i) continue;
    num *= FieldElement(BigInt(j), q);
    den *= FieldElement(BigInt(j), q) - FieldElement(BigInt(i), q);
  }
  return num * den.inverse();
}

FieldElement shamir_reconstruct(std::span<const Share> shares, std::size_t t) {
  if (t < 1) throw Error(ErrorCode::Reconstruction, "threshold must be at least 1");
  if (shares.size() < t) {
    throw Error(ErrorCode::Reconstruction, "need " + std::to_string(t) + " shares, got " + std::to_string(shares.size()));
  }
  std::set<std::uint32_t> seen;
  for (const auto& s : shares) {
    if (s.index == 0) throw Error(ErrorCode::Reconstruction, "share index 0 is invalid");
    if (!seen.insert(s.index).second) {
      throw Error(ErrorCode::Reconstruction, "duplicate share index " + std::to_string(s.index));
    }
  }
  auto used = shares.first(t);
  std::vector<std::uint32_t> indices;
  for (const auto& s : used) indices.push_back(s.index);
  const auto& q = used.front().value.modulus();
  FieldElement acc(0, q);
  for (const auto& s : used) acc += lagrange_coefficient(indices, s.index, q) * s.value;
  return acc;
}

std::vector<Element> feldman_commit(std::span<const FieldElement> coefficients, const Group& group) {
  std::vector<Element> out;
  out.reserve(coefficients.size());
  for (const auto& c : coefficients) out.push_back(group.exp_generator(c));
  return out;
}

Element feldman_public_share(const Group& group, std::uint32_t index, std::span<const Element> commitments) {
  Element acc = group.identity();
  FieldElement power(1, group.order());
  const FieldElement i(BigInt(index), group.order());
  for (const auto& a : commitments) {
    acc = group.op(acc, group.exp(a, power));
    power *= i;
  }
  return acc;
}

bool feldman_verify(const Group& group, const Share& share, std::span<const Element> commitments) {
  if (share.index == 0 || commitments.empty()) return false;
  if (share.value.modulus() != group.order()) return false;
  return group.exp_generator(share.value) == feldman_public_share(group, share.index, commitments);
}

}  // namespace qoesign
