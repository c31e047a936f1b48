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

#include <map>
#include <string>
#include <vector>

#include "qoesign/group/shamir.hpp"
#include "qoesign/random.hpp"
#include "qoesign/suite/suite.hpp"

namespace qoesign::protocol {

// t-of-n QTSPs plus, in QES mode, the user.
struct AccessStructure {
  std::uint32_t t = 1;
  std::uint32_t n = 1;
  bool user_mandatory = true;

  // Throws Parameter unless 1 <= t <= n.
  void validate() const;
  bool operator==(const AccessStructure&) const = default;
};

struct Holder {
  enum class Kind : std::uint8_t { User = 0, Qtsp = 1 };
  Kind kind = Kind::User;
  std::uint32_t index = 0;  // 0 for the user, 1..n for QTSPs

  static Holder user() { return {Kind::User, 0}; }
  static Holder qtsp(std::uint32_t i) { return {Kind::Qtsp, i}; }
  bool is_user() const { return kind == Kind::User; }
  // "user" or "qtsp-<i>"
  std::string name() const;
  static Holder parse(std::string_view name);

  auto operator<=>(const Holder&) const = default;
};

// Secret material of one holder for one epoch. Never serialized in clear.
struct KeyShare {
  Holder holder;
  FieldElement secret;
  std::uint32_t epoch = 0;
  std::string suite_id;
};

// Public record of a distributed key. Holds no secret.
struct DistributedKey {
  std::string suite_id;
  AccessStructure access;
  Element group_public_key;
  Element user_public_share;
  std::map<std::uint32_t, Element> dealer_constant_commitments;  // A_{j,0} per dealer
  std::vector<Element> aggregate_commitments;                    // C_k = prod_j A_{j,k}
  std::map<std::uint32_t, Element> qtsp_public_shares;           // g^{s_Q,i}
  std::uint32_t epoch = 0;

  // Recomputes group_public_key and every QTSP public share from the
  // commitments; throws InvalidKey on any mismatch.
  void check_consistency(const Group& group) const;
  std::vector<std::uint32_t> qtsp_indices() const;
};

// One dealer's Feldman sharing: commitments broadcast, shares sent privately.
struct Dealing {
  std::uint32_t dealer = 0;
  std::vector<Element> commitments;
  std::map<std::uint32_t, FieldElement> shares;
};

Dealing make_dealing(std::uint32_t dealer, const Polynomial& polynomial, const Group& group, std::uint32_t n);

// Recipient-side check of one dealing. Throws `abort_code` naming the dealer.
void verify_dealing(const Dealing& dealing, std::uint32_t recipient, const Group& group, std::uint32_t t,
                    ErrorCode abort_code = ErrorCode::DkgAbort);

struct DkgResult {
  DistributedKey key;
  KeyShare user_share;
  std::vector<KeyShare> qtsp_shares;  // ordered by index 1..n
};

// Every recipient verifies every dealing, then sums. Throws DkgAbort naming
// the first offending dealer, InvalidKey if the joint key is the identity.
DkgResult finalize_dkg(const AccessStructure& access, const SignatureSuite& suite, const std::vector<Dealing>& dealings,
                       const FieldElement& user_secret);

// Dealer j draws its polynomial from dealer_rngs[j-1] (constant first, then
// ascending); the user then draws s_U from user_rng, redrawing while the
// joint key would be the identity.
DkgResult dkg(const AccessStructure& access, const SignatureSuite& suite, RandomSource& user_rng,
              const std::vector<RandomSource*>& dealer_rngs);
DkgResult dkg(const AccessStructure& access, const SignatureSuite& suite, RandomSource& rng);

struct RefreshResult {
  DistributedKey key;
  KeyShare user_share;
  std::vector<KeyShare> qtsp_shares;
};

// Applies zero-constant dealings from all n QTSPs. Throws RefreshAbort naming
// the dealer on a nonzero constant commitment or a failing share.
RefreshResult finalize_refresh(const DistributedKey& key, const SignatureSuite& suite, const KeyShare& user_share,
                               const std::vector<KeyShare>& qtsp_shares, const std::vector<Dealing>& zero_dealings);

RefreshResult refresh_shares(const DistributedKey& key, const SignatureSuite& suite, const KeyShare& user_share,
                             const std::vector<KeyShare>& qtsp_shares, RandomSource& rng);

}  // namespace qoesign::protocol
