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

#include "qoesign/protocol/keys.hpp"

#include <charconv>

namespace qoesign::protocol {

void AccessStructure::validate() const {
  if (n < 1) throw Error(ErrorCode::Parameter, "access structure needs n >= 1");
  if (t < 1 || t > n) {
    throw Error(ErrorCode::Parameter, "threshold t=" + std::to_string(t) + " must satisfy 1 <= t <= n=" + std::to_string(n));
  }
}

std::string Holder::name() const { return is_user() ? "user" : "qtsp-" + std::to_string(index); }

Holder Holder::parse(std::string_view name) {
  if (name == "user") return user();
  if (name.rfind("qtsp-", 0) == 0) {
    std::uint32_t i = 0;
    auto digits = name.substr(5);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && i > 0) return qtsp(i);
  }
  throw Error(ErrorCode::Decode, "unknown holder name: " + std::string(name));
}

std::vector<std::uint32_t> DistributedKey::qtsp_indices() const {
  std::vector<std::uint32_t> out;
  for (const auto& [i, _] : qtsp_public_shares) out.push_back(i);
  return out;
}

void DistributedKey::check_consistency(const Group& group) const {
  if (aggregate_commitments.size() != access.t) {
    throw Error(ErrorCode::InvalidKey, "expected " + std::to_string(access.t) + " aggregate commitments");
  }
  Element pk = user_public_share;
  for (const auto& [_, a0] : dealer_constant_commitments) pk = group.op(pk, a0);
  if (pk != group_public_key) throw Error(ErrorCode::InvalidKey, "group public key does not match its commitments");
  if (qtsp_public_shares.size() != access.n) throw Error(ErrorCode::InvalidKey, "missing QTSP public shares");
  for (const auto& [i, y] : qtsp_public_shares) {
    if (feldman_public_share(group, i, aggregate_commitments) != y) {
      throw Error(ErrorCode::InvalidKey, "public share of qtsp-" + std::to_string(i) + " does not match commitments");
    }
  }
  if (group.is_identity(group_public_key)) throw Error(ErrorCode::InvalidKey, "group public key is the identity");
}

Dealing make_dealing(std::uint32_t dealer, const Polynomial& polynomial, const Group& group, std::uint32_t n) {
  Dealing d;
  d.dealer = dealer;
  d.commitments = feldman_commit(polynomial.coefficients(), group);
  for (std::uint32_t i = 1; i <= n; ++i) d.shares.emplace(i, polynomial.evaluate(i));
  return d;
}

void verify_dealing(const Dealing& dealing, std::uint32_t recipient, const Group& group, std::uint32_t t,
                    ErrorCode abort_code) {
  const std::string who = "qtsp-" + std::to_string(dealing.dealer);
  auto fail = [&](const std::string& why) {
    throw Error(abort_code, "dealer " + who + " " + why + " (recipient qtsp-" + std::to_string(recipient) + ")", {who});
  };
  if (dealing.commitments.size() != t) fail("published " + std::to_string(dealing.commitments.size()) + " commitments");
  for (const auto& c : dealing.commitments) {
    try {
      group.decode(c.encoding);
    } catch (const Error&) {
      fail("published a malformed commitment");
    }
  }
  auto it = dealing.shares.find(recipient);
  if (it == dealing.shares.end()) fail("sent no share");
  if (!feldman_verify(group, {recipient, it->second}, dealing.commitments)) fail("sent a share failing verification");
}

namespace {

void check_dealers(const std::vector<Dealing>& dealings, std::uint32_t n, ErrorCode code) {
  if (dealings.size() != n) throw Error(code, "expected dealings from all " + std::to_string(n) + " QTSPs");
  for (std::uint32_t j = 1; j <= n; ++j) {
    if (dealings[j - 1].dealer != j) throw Error(code, "dealings must be ordered by dealer index 1..n");
  }
}

void fill_public_shares(DistributedKey& key, const Group& group) {
  key.qtsp_public_shares.clear();
  for (std::uint32_t i = 1; i <= key.access.n; ++i) {
    key.qtsp_public_shares.emplace(i, feldman_public_share(group, i, key.aggregate_commitments));
  }
}

}  // namespace

DkgResult finalize_dkg(const AccessStructure& access, const SignatureSuite& suite, const std::vector<Dealing>& dealings,
                       const FieldElement& user_secret) {
  access.validate();
  if (!suite.threshold_capable) throw Error(ErrorCode::Parameter, "suite " + suite.suite_id + " is not threshold-capable");
  const Group& g = suite.require_group();
  if (BigInt(access.n) >= g.order()) throw Error(ErrorCode::Parameter, "n must be below the group order");
  check_dealers(dealings, access.n, ErrorCode::DkgAbort);

  for (std::uint32_t i = 1; i <= access.n; ++i) {
    for (const auto& d : dealings) verify_dealing(d, i, g, access.t, ErrorCode::DkgAbort);
  }

  DkgResult out;
  DistributedKey& key = out.key;
  key.suite_id = suite.suite_id;
  key.access = access;
  key.epoch = 0;
  key.user_public_share = g.exp_generator(user_secret);
  key.aggregate_commitments.assign(access.t, g.identity());
  for (const auto& d : dealings) {
    key.dealer_constant_commitments.emplace(d.dealer, d.commitments[0]);
    for (std::size_t k = 0; k < access.t; ++k) {
      key.aggregate_commitments[k] = g.op(key.aggregate_commitments[k], d.commitments[k]);
    }
  }
  key.group_public_key = key.user_public_share;
  for (const auto& d : dealings) key.group_public_key = g.op(key.group_public_key, d.commitments[0]);
  if (g.is_identity(key.group_public_key)) throw Error(ErrorCode::InvalidKey, "joint public key is the identity");
  fill_public_shares(key, g);

  out.user_share = {Holder::user(), user_secret, 0, suite.suite_id};
  for (std::uint32_t i = 1; i <= access.n; ++i) {
    FieldElement s(0, g.order());
    for (const auto& d : dealings) s += d.shares.at(i);
    out.qtsp_shares.push_back({Holder::qtsp(i), s, 0, suite.suite_id});
  }
  key.check_consistency(g);
  return out;
}

DkgResult dkg(const AccessStructure& access, const SignatureSuite& suite, RandomSource& user_rng,
              const std::vector<RandomSource*>& dealer_rngs) {
  access.validate();
  if (dealer_rngs.size() != access.n) throw Error(ErrorCode::Parameter, "need one randomness source per QTSP");
  const Group& g = suite.require_group();
  std::vector<Dealing> dealings;
  Element constants = g.identity();
  for (std::uint32_t j = 1; j <= access.n; ++j) {
    RandomSource& rng = *dealer_rngs[j - 1];
    FieldElement a0 = rng.draw_scalar(g.order(), false);
    auto poly = Polynomial::random(a0, access.t - 1, rng);
    dealings.push_back(make_dealing(j, poly, g, access.n));
    constants = g.op(constants, dealings.back().commitments[0]);
  }
  FieldElement s_user = user_rng.draw_scalar(g.order(), true);
  while (g.is_identity(g.op(g.exp_generator(s_user), constants))) s_user = user_rng.draw_scalar(g.order(), true);
  return finalize_dkg(access, suite, dealings, s_user);
}

DkgResult dkg(const AccessStructure& access, const SignatureSuite& suite, RandomSource& rng) {
  std::vector<RandomSource*> rngs(access.n, &rng);
  return dkg(access, suite, rng, rngs);
}

RefreshResult finalize_refresh(const DistributedKey& key, const SignatureSuite& suite, const KeyShare& user_share,
                               const std::vector<KeyShare>& qtsp_shares, const std::vector<Dealing>& zero_dealings) {
  if (suite.suite_id != key.suite_id) throw Error(ErrorCode::Parameter, "refresh suite differs from the key's suite");
  const Group& g = suite.require_group();
  check_dealers(zero_dealings, key.access.n, ErrorCode::RefreshAbort);
  if (qtsp_shares.size() != key.access.n) throw Error(ErrorCode::RefreshAbort, "refresh needs all n QTSP shares");
  for (const auto& s : qtsp_shares) {
    if (s.epoch != key.epoch) throw Error(ErrorCode::StateViolation, s.holder.name() + " holds a stale share");
  }
  for (const auto& d : zero_dealings) {
    if (d.commitments.empty() || !g.is_identity(d.commitments[0])) {
      std::string who = "qtsp-" + std::to_string(d.dealer);
      throw Error(ErrorCode::RefreshAbort, "dealer " + who + " zero-sharing has a nonzero constant (public-key drift)",
                  {who});
    }
  }
  for (std::uint32_t i = 1; i <= key.access.n; ++i) {
    for (const auto& d : zero_dealings) verify_dealing(d, i, g, key.access.t, ErrorCode::RefreshAbort);
  }

  RefreshResult out;
  out.key = key;
  out.key.epoch = key.epoch + 1;
  for (const auto& d : zero_dealings) {
    for (std::size_t k = 0; k < key.access.t; ++k) {
      out.key.aggregate_commitments[k] = g.op(out.key.aggregate_commitments[k], d.commitments[k]);
    }
  }
  fill_public_shares(out.key, g);
  out.user_share = user_share;
  out.user_share.epoch = out.key.epoch;
  for (const auto& old : qtsp_shares) {
    KeyShare s = old;
    for (const auto& d : zero_dealings) s.secret += d.shares.at(old.holder.index);
    s.epoch = out.key.epoch;
    out.qtsp_shares.push_back(std::move(s));
  }
  out.key.check_consistency(g);
  if (out.key.group_public_key != key.group_public_key) throw Error(ErrorCode::RefreshAbort, "public key changed");
  return out;
}

RefreshResult refresh_shares(const DistributedKey& key, const SignatureSuite& suite, const KeyShare& user_share,
                             const std::vector<KeyShare>& qtsp_shares, RandomSource& rng) {
  const Group& g = suite.require_group();
  std::vector<Dealing> dealings;
  for (std::uint32_t j = 1; j <= key.access.n; ++j) {
    auto poly = Polynomial::random(g.scalar(0), key.access.t - 1, rng);
    dealings.push_back(make_dealing(j, poly, g, key.access.n));
  }
  return finalize_refresh(key, suite, user_share, qtsp_shares, dealings);
}

}  // namespace qoesign::protocol
