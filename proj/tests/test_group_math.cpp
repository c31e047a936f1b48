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

#include <set>

#include "doctest.h"
#include "qoesign/group/shamir.hpp"
#include "support/oracles.hpp"
#include "support/scripted_random.hpp"

using namespace qoesign;
using qoesign::testing::ScriptedRandom;

namespace {

const BigInt kQ31 = 31;

FieldElement f31(long long v) { return {v, kQ31}; }

std::uint32_t toy_value(const Element& e) {
  ByteReader r(e.encoding);
  return r.u32();
}

// All k-subsets of {1..n} as index vectors.
std::vector<std::vector<std::uint32_t>> subsets(std::uint32_t n, std::uint32_t k) {
  std::vector<std::vector<std::uint32_t>> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::uint32_t>(__builtin_popcount(mask)) != k) continue;
    std::vector<std::uint32_t> s;
    for (std::uint32_t i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i + 1);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_SUITE("group-math") {
  TEST_CASE("field element arithmetic and modulus checks") {
    CHECK((f31(20) + f31(15)).value() == 4);
    CHECK((f31(3) - f31(5)).value() == 29);
    CHECK((f31(7) * f31(9)).value() == 1);
    CHECK(f31(7).inverse().value() == 9);
    CHECK(FieldElement(-1, kQ31).value() == 30);
    CHECK_THROWS_AS(f31(0).inverse(), Error);
    CHECK_THROWS_AS(f31(1) + FieldElement(1, BigInt(11)), Error);
    CHECK_THROWS_AS(FieldElement::decode(big_to_be(31, 2), kQ31), Error);
  }

  TEST_CASE("shamir split with t=1 gives the secret everywhere") {
    ScriptedRandom rng{};
    auto shares = shamir_split(f31(5), 1, 3, rng);
    REQUIRE(shares.size() == 3);
    for (const auto& s : shares) CHECK(s.value.value() == 5);
  }

  TEST_CASE("shamir split evaluates the injected polynomial 5+3x") {
    ScriptedRandom rng{3};
    auto shares = shamir_split(f31(5), 2, 3, rng);
    REQUIRE(shares.size() == 3);
    // Oracle: plain-integer evaluation of 5+3x mod 31.
    for (std::uint32_t i = 1; i <= 3; ++i) {
      CHECK(shares[i - 1].index == i);
      CHECK(shares[i - 1].value.value() == oracle::evaluate({5, 3}, i, 31));
    }
    CHECK(shares[0].value.value() == 8);
    CHECK(shares[1].value.value() == 11);
    CHECK(shares[2].value.value() == 14);
  }

  TEST_CASE("shamir split parameter errors") {
    ScriptedRandom rng{};
    CHECK_THROWS_AS(shamir_split(f31(5), 4, 3, rng), Error);
    CHECK_THROWS_AS(shamir_split(f31(5), 0, 3, rng), Error);
    CHECK_THROWS_AS(shamir_split(f31(5), 2, 31, rng), Error);
    try {
      shamir_split(f31(5), 4, 3, rng);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parameter);
    }
  }

  TEST_CASE("reconstruction from (1,8),(3,14) and from every 2-subset") {
    std::vector<Share> two{{1, f31(8)}, {3, f31(14)}};
    CHECK(shamir_reconstruct(two, 2).value() == 5);

    std::vector<Share> all{{1, f31(8)}, {2, f31(11)}, {3, f31(14)}};
    for (const auto& subset : subsets(3, 2)) {
      std::vector<Share> chosen;
      std::vector<std::pair<std::int64_t, std::int64_t>> points;
      for (auto i : subset) {
        chosen.push_back(all[i - 1]);
        points.emplace_back(i, static_cast<std::int64_t>(all[i - 1].value.value()));
      }
      auto coeffs = oracle::interpolate_coefficients(points, 31);
      REQUIRE(coeffs);
      CHECK((*coeffs)[0] == 5);
      CHECK(shamir_reconstruct(chosen, 2).value() == 5);
    }
  }

  TEST_CASE("reconstruction errors") {
    std::vector<Share> dup{{1, f31(8)}, {1, f31(8)}};
    CHECK_THROWS_AS(shamir_reconstruct(dup, 2), Error);
    std::vector<Share> one{{1, f31(8)}};
    CHECK_THROWS_AS(shamir_reconstruct(one, 2), Error);
    try {
      shamir_reconstruct(dup, 2);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Reconstruction);
    }
  }

  TEST_CASE("lagrange coefficients") {
    std::vector<std::uint32_t> ids{1, 2};
    CHECK(lagrange_coefficient(ids, 1, kQ31).value() == 2);
    CHECK(lagrange_coefficient(ids, 2, kQ31).value() == 30);
    std::vector<std::uint32_t> single{5};
    CHECK(lagrange_coefficient(single, 5, kQ31).value() == 1);
    CHECK(lagrange_coefficient(single, 5, BigInt(11)).value() == 1);
    CHECK_THROWS_AS(lagrange_coefficient(ids, 3, kQ31), Error);
  }

  TEST_CASE("lagrange identity over every t-subset") {
    SeededRandom rng(11, "lagrange");
    for (std::uint32_t n = 1; n <= 5; ++n) {
      for (std::uint32_t t = 1; t <= n; ++t) {
        auto secret = rng.draw_scalar(kQ31, false);
        auto shares = shamir_split(secret, t, n, rng);
        for (const auto& subset : subsets(n, t)) {
          FieldElement acc(0, kQ31);
          for (auto i : subset) acc += lagrange_coefficient(subset, i, kQ31) * shares[i - 1].value;
          CHECK(acc == secret);
        }
      }
    }
  }

  TEST_CASE("round trip exhaustive over F31 for t <= n <= 5") {
    SeededRandom rng(1, "roundtrip");
    for (long long s = 0; s < 31; ++s) {
      for (std::size_t n = 1; n <= 5; ++n) {
        for (std::size_t t = 1; t <= n; ++t) {
          auto shares = shamir_split(f31(s), t, n, rng);
          CHECK(shamir_reconstruct(shares, t).value() == s);
        }
      }
    }
  }

  TEST_CASE("feldman commitments in the toy group") {
    auto g = toy_group();
    std::vector<FieldElement> c3{g->scalar(3)};
    auto a = feldman_commit(c3, *g);
    REQUIRE(a.size() == 1);
    CHECK(toy_value(a[0]) == 8);
    CHECK(toy_value(a[0]) == oracle::pow_mod(2, 3, 23));

    std::vector<FieldElement> zero{g->scalar(0)};
    CHECK(g->is_identity(feldman_commit(zero, *g)[0]));

    // f(x) = 3 + 2x: share (1, 5), g^5 = A0 * A1.
    std::vector<FieldElement> f{g->scalar(3), g->scalar(2)};
    auto commitments = feldman_commit(f, *g);
    Share s1{1, g->scalar(5)};
    CHECK(feldman_verify(*g, s1, commitments));
    CHECK(oracle::pow_mod(2, 5, 23) == oracle::mod(8 * 4, 23));
  }

  TEST_CASE("feldman accepts honest shares and rejects every offset, exhaustively") {
    auto g = toy_group();
    for (long long a0 = 0; a0 < 11; ++a0) {
      for (long long a1 = 0; a1 < 11; ++a1) {
        Polynomial poly({g->scalar(a0), g->scalar(a1), g->scalar((a0 * 3 + a1) % 11)});
        auto commitments = feldman_commit(poly.coefficients(), *g);
        for (const auto& share : shamir_split(poly, 5)) {
          CHECK(feldman_verify(*g, share, commitments));
          for (long long delta = 1; delta < 11; ++delta) {
            Share bad{share.index, share.value + g->scalar(delta)};
            CHECK_FALSE(feldman_verify(*g, bad, commitments));
          }
        }
      }
    }
  }

  TEST_CASE("toy group encoding round trips and rejects non-members") {
    auto g = toy_group();
    std::set<std::uint32_t> members;
    for (long long k = 0; k < 11; ++k) members.insert(toy_value(g->exp_generator(g->scalar(k))));
    CHECK(members.size() == 11);
    for (std::uint32_t v = 0; v < 64; ++v) {
      ByteWriter w;
      w.u32(v);
      Bytes enc = std::move(w).take();
      if (members.count(v)) {
        CHECK(g->decode(enc).encoding == enc);
      } else {
        CHECK_THROWS_AS(g->decode(enc), Error);
      }
    }
    CHECK_THROWS_AS(g->decode(Bytes{0, 0, 8}), Error);
  }

  TEST_CASE("p256 group basics and canonical encoding") {
    auto g = p256_group();
    CHECK(g->element_size() == 33);
    CHECK(g->scalar_size() == 32);
    CHECK(to_hex(g->encode_scalar(g->scalar(g->order() - 1))) ==
          "ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632550");
    SeededRandom rng(3, "p256");
    for (int i = 0; i < 20; ++i) {
      auto a = rng.draw_scalar(g->order(), true);
      auto b = rng.draw_scalar(g->order(), true);
      auto ga = g->exp_generator(a);
      CHECK(g->decode(ga.encoding) == ga);
      // g^a * g^b == g^(a+b)
      CHECK(g->op(ga, g->exp_generator(b)) == g->exp_generator(a + b));
      CHECK(g->exp(ga, b) == g->exp_generator(a * b));
    }
    CHECK(g->exp_generator(g->scalar(0)) == g->identity());
    CHECK(g->decode(g->identity().encoding) == g->identity());
    CHECK(g->op(g->identity(), g->generator()) == g->generator());

    Bytes bad = g->generator().encoding;
    bad[0] = 0x04;
    CHECK_THROWS_AS(g->decode(bad), Error);
    Bytes big(33, 0xff);
    big[0] = 0x02;
    CHECK_THROWS_AS(g->decode(big), Error);
    CHECK_THROWS_AS(g->decode(Bytes(32, 0)), Error);
  }
}
