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
#include <optional>
#include <set>

#include "qoesign/ledger/ledger.hpp"
#include "qoesign/protocol/keys.hpp"

namespace qoesign::protocol {

enum class SessionState { Requested, AwaitingUserApproval, NonceCommitment, PartialSigning, Aggregated, Completed, Aborted };

enum class AbortReason {
  None,
  UserDenied,
  UserUnavailable,
  InsufficientQuorum,
  Misbehavior,
  LedgerUnavailable,
  ParticipantDropped,
  Timeout,
};

enum class Decision { Approve, Deny };

std::string_view to_string(SessionState s);
std::string_view to_string(AbortReason r);
std::string_view to_string(Decision d);
AbortReason parse_abort_reason(std::string_view s);  // Parameter on unknown names
Decision parse_decision(std::string_view s);

// Participant set: the user plus the lowest-index t responsive QTSPs.
// Throws InsufficientQuorum listing who answered.
std::vector<std::uint32_t> choose_participants(const AccessStructure& access, const std::set<std::uint32_t>& responsive);

// Coordinator-side view of one signing attempt. Single owner; every
// transition either succeeds or throws and leaves the state untouched,
// except where a failure is defined to abort the session.
class SigningSession {
 public:
  // Requested -> AwaitingUserApproval. The suite must match the key and
  // allow new signatures (SuiteRefused otherwise).
  static SigningSession start(const DistributedKey& key, const SignatureSuite& suite, const Hash32& message_hash,
                              const std::set<std::uint32_t>& responsive_qtsps, const SessionId& session_id);
  static SigningSession start(const DistributedKey& key, const SignatureSuite& suite, const Hash32& message_hash,
                              const std::set<std::uint32_t>& responsive_qtsps, RandomSource& rng);

  // Approve -> NonceCommitment. Deny -> Aborted(UserDenied) and a
  // SessionDenied ledger entry when a ledger is given.
  void approve(Decision decision, ledger::SigningLedger* ledger);

  // Once every participant has committed: R = prod R_h, c = challenge, and
  // the session moves to PartialSigning.
  void contribute_nonce(const Holder& holder, const Element& commitment);

  // Verifies g^z = R_h * Y_h^{c * lambda_h}. A failing partial aborts the
  // session with Misbehavior and throws Error(Misbehavior) naming the holder.
  void contribute_partial(const Holder& holder, const FieldElement& z);

  // Sums the partials, appends SessionCompleted and only then releases the
  // signature. A ledger failure aborts with LedgerUnavailable and rethrows.
  Signature aggregate(ledger::SigningLedger& ledger);

  // Any non-terminal state -> Aborted(reason). Records SessionAborted when a
  // ledger is given; ledger errors are swallowed since the session is dead.
  void abort(AbortReason reason, ledger::SigningLedger* ledger = nullptr);

  SessionState state() const { return state_; }
  AbortReason abort_reason() const { return abort_reason_; }
  const SessionId& session_id() const { return session_id_; }
  const Hash32& message_hash() const { return message_hash_; }
  const std::string& suite_id() const { return suite_.suite_id; }
  std::uint32_t epoch() const { return key_.epoch; }
  const DistributedKey& key() const { return key_; }
  // User first, then QTSPs ascending.
  const std::vector<Holder>& participants() const { return participants_; }
  std::vector<std::uint32_t> qtsp_participants() const;
  bool is_participant(const Holder& h) const;
  const std::map<Holder, Element>& commitments() const { return commitments_; }
  const std::map<Holder, FieldElement>& partials() const { return partials_; }
  std::optional<Element> aggregate_commitment() const { return aggregate_commitment_; }
  std::optional<FieldElement> challenge() const { return challenge_; }
  std::optional<Holder> misbehaving() const { return misbehaving_; }
  const std::optional<Signature>& signature() const { return signature_; }
  bool terminal() const { return state_ == SessionState::Completed || state_ == SessionState::Aborted; }

  // Exponent weight of a holder's share: 1 for the user, lambda_i for QTSP i.
  FieldElement weight(const Holder& h) const;

 private:
  SigningSession(const DistributedKey& key, SignatureSuite suite, const Hash32& message_hash, const SessionId& id,
                 std::vector<Holder> participants);
  void require_state(SessionState expected, const char* op) const;
  void require_participant(const Holder& h, const char* op) const;

  DistributedKey key_;
  SignatureSuite suite_;
  Hash32 message_hash_;
  SessionId session_id_;
  SessionState state_ = SessionState::Requested;
  AbortReason abort_reason_ = AbortReason::None;
  std::vector<Holder> participants_;
  std::map<Holder, Element> commitments_;
  std::map<Holder, FieldElement> partials_;
  std::optional<Element> aggregate_commitment_;
  std::optional<FieldElement> challenge_;
  std::optional<Holder> misbehaving_;
  std::optional<Signature> signature_;
};

}  // namespace qoesign::protocol
