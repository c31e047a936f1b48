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
#include <optional>
#include <utility>
#include <vector>

// Test-only oracles over small prime fields, written with plain integers so
// they share no code path with the library under test.
namespace qoesign::oracle {

inline std::int64_t mod(std::int64_t a, std::int64_t p) { return ((a % p) + p) % p; }

inline std::int64_t pow_mod(std::int64_t b, std::int64_t e, std::int64_t p) {
  std::int64_t r = 1;
  b = mod(b, p);
  while (e > 0) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

inline std::int64_t inv_mod(std::int64_t a, std::int64_t p) {
  // Brute force; fine for the tiny fields used here.
  a = mod(a, p);
  for (std::int64_t x = 1; x < p; ++x)
    if (a * x % p == 1) return x;
  return 0;
}

// Solves the Vandermonde system sum_k c_k x_i^k = y_i by Gaussian
// elimination mod p. Returns nullopt when the system is singular.
inline std::optional<std::vector<std::int64_t>> interpolate_coefficients(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& points, std::int64_t p) {
  const std::size_t m = points.size();
  std::vector<std::vector<std::int64_t>> a(m, std::vector<std::int64_t>(m + 1));
  for (std::size_t r = 0; r < m; ++r) {
    std::int64_t xp = 1;
    for (std::size_t c = 0; c < m; ++c) {
      a[r][c] = xp;
      xp = xp * mod(points[r].first, p) % p;
    }
    a[r][m] = mod(points[r].second, p);
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    while (pivot < m && a[pivot][col] == 0) ++pivot;
    if (pivot == m) return std::nullopt;
    std::swap(a[pivot], a[col]);
    std::int64_t inv = inv_mod(a[col][col], p);
    for (auto& v : a[col]) v = v * inv % p;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || a[r][col] == 0) continue;
      std::int64_t f = a[r][col];
      for (std::size_t c = 0; c <= m; ++c) a[r][c] = mod(a[r][c] - f * a[col][c], p);
    }
  }
  std::vector<std::int64_t> out(m);
  for (std::size_t r = 0; r < m; ++r) out[r] = a[r][m];
  return out;
}

inline std::int64_t evaluate(const std::vector<std::int64_t>& coeffs, std::int64_t x, std::int64_t p) {
  std::int64_t acc = 0, xp = 1;
  for (auto c : coeffs) {
    acc = mod(acc + c * xp, p);
    xp = xp * x % p;
  }
  return acc;
}

// Discrete log in the toy group (p=23, g=2, order 11) by enumeration.
inline std::int64_t toy_dlog(std::int64_t y) {
  for (std::int64_t k = 0; k < 11; ++k)
    if (pow_mod(2, k, 23) == y) return k;
  return -1;
}

}  // namespace qoesign::oracle
