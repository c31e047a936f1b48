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

#include "qoesign/ledger/ledger.hpp"
#include "qoesign/protocol/session.hpp"

namespace qoesign::protocol {

// What a coordinator asks of a share holder before it commits a nonce.
struct NonceRequest {
  SessionId session_id{};
  Hash32 message_hash{};
  std::string suite_id;
  std::uint32_t epoch = 0;
  std::vector<Holder> participants;
};

// Holder-side protocol logic around one KeyShare. The node derives the
// challenge itself from the commitments it is shown, so a coordinator cannot
// steer it into answering two different challenges for one nonce.
class SignerNode {
 public:
  SignerNode(KeyShare share, DistributedKey key, SignatureSuite suite, RandomSource& rng);
  virtual ~SignerNode() = default;

  const Holder& holder() const { return share_.holder; }
  std::uint32_t epoch() const { return share_.epoch; }
  const DistributedKey& key() const { return key_; }
  const SignatureSuite& suite() const { return suite_; }

  // Fresh nonce per session; a repeated request for the same session returns
  // the same commitment. Throws ProtocolViolation for foreign suites, stale
  // epochs, or a request that changes the session's message or participants.
  Element commit_nonce(const NonceRequest& request);

  // z = r + c * w * s where w is 1 (user) or lambda_i. Idempotent for the
  // same commitments; any other commitment set for a used nonce is refused.
  FieldElement sign_partial(const SessionId& session_id, const std::map<Holder, Element>& commitments);

  // Swaps in a refreshed or migrated share. Pending nonces are discarded.
  void install(KeyShare share, DistributedKey key, SignatureSuite suite);
  void set_suite_status(SuiteStatus status) { suite_.status = status; }

  // Holder-local secret. Never placed in a protocol message.
  const KeyShare& share() const { return share_; }

 protected:
  virtual void authorize(const NonceRequest& request) const;

 private:
  struct NonceState {
    Hash32 message_hash{};
    std::vector<Holder> participants;
    std::optional<FieldElement> nonce;  // erased once used
    Element commitment;
    std::optional<std::map<Holder, Element>> answered_commitments;
    std::optional<FieldElement> answered_z;
  };

  KeyShare share_;
  DistributedKey key_;
  SignatureSuite suite_;
  RandomSource* rng_;
  std::map<SessionId, NonceState> sessions_;
};

// The user's device. Refuses nonces for sessions it has not approved and
// keeps the local approval log that user_audit compares against.
class UserSigner final : public SignerNode {
 public:
  using SignerNode::SignerNode;

  void record_decision(const SessionId& session_id, const Hash32& message_hash, Decision decision);
  const std::vector<ledger::ApprovalRecord>& approvals() const { return approvals_; }
  bool approved(const SessionId& session_id, const Hash32& message_hash) const;

 protected:
  void authorize(const NonceRequest& request) const override;

 private:
  std::vector<ledger::ApprovalRecord> approvals_;
};

}  // namespace qoesign::protocol
