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

#include "qoesign/protocol/session.hpp"

#include "qoesign/suite/schnorr.hpp"

namespace qoesign::protocol {

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Requested: return "requested";
    case SessionState::AwaitingUserApproval: return "awaiting_user_approval";
    case SessionState::NonceCommitment: return "nonce_commitment";
    case SessionState::PartialSigning: return "partial_signing";
    case SessionState::Aggregated: return "aggregated";
    case SessionState::Completed: return "completed";
    case SessionState::Aborted: return "aborted";
  }
  return "unknown";
}

std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::UserDenied: return "user_denied";
    case AbortReason::UserUnavailable: return "user_unavailable";
    case AbortReason::InsufficientQuorum: return "insufficient_quorum";
    case AbortReason::Misbehavior: return "misbehavior";
    case AbortReason::LedgerUnavailable: return "ledger_unavailable";
    case AbortReason::ParticipantDropped: return "participant_dropped";
    case AbortReason::Timeout: return "timeout";
  }
  return "unknown";
}

AbortReason parse_abort_reason(std::string_view s) {
  for (auto r : {AbortReason::None, AbortReason::UserDenied, AbortReason::UserUnavailable, AbortReason::InsufficientQuorum,
                 AbortReason::Misbehavior, AbortReason::LedgerUnavailable, AbortReason::ParticipantDropped,
                 AbortReason::Timeout}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::Parameter, "unknown abort reason '" + std::string(s) + "'");
}

std::string_view to_string(Decision d) { return d == Decision::Approve ? "approve" : "deny"; }

Decision parse_decision(std::string_view s) {
  if (s == "approve") return Decision::Approve;
  if (s == "deny") return Decision::Deny;
  throw Error(ErrorCode::Parameter, "decision must be 'approve' or 'deny'");
}

std::vector<std::uint32_t> choose_participants(const AccessStructure& access, const std::set<std::uint32_t>& responsive) {
  access.validate();
  std::vector<std::uint32_t> chosen;
  std::vector<std::string> answered;
  for (auto i : responsive) {
    if (i < 1 || i > access.n) continue;
    answered.push_back("qtsp-" + std::to_string(i));
    if (chosen.size() < access.t) chosen.push_back(i);
  }
  if (chosen.size() < access.t) {
    throw Error(ErrorCode::InsufficientQuorum,
                std::to_string(answered.size()) + " of the required " + std::to_string(access.t) + " QTSPs responded",
                answered);
  }
  return chosen;
}

SigningSession::SigningSession(const DistributedKey& key, SignatureSuite suite, const Hash32& message_hash,
                               const SessionId& id, std::vector<Holder> participants)
    : key_(key),
      suite_(std::move(suite)),
      message_hash_(message_hash),
      session_id_(id),
      participants_(std::move(participants)) {}

SigningSession SigningSession::start(const DistributedKey& key, const SignatureSuite& suite, const Hash32& message_hash,
                                     const std::set<std::uint32_t>& responsive_qtsps, const SessionId& session_id) {
  if (suite.suite_id != key.suite_id) {
    throw Error(ErrorCode::Parameter, "key belongs to " + key.suite_id + ", not " + suite.suite_id);
  }
  if (!key.access.user_mandatory) {
    throw Error(ErrorCode::Parameter, "signing without the user is not supported in QES mode");
  }
  require_signing_allowed(suite);
  auto chosen = choose_participants(key.access, responsive_qtsps);
  std::vector<Holder> participants{Holder::user()};
  for (auto i : chosen) participants.push_back(Holder::qtsp(i));
  SigningSession s(key, suite, message_hash, session_id, std::move(participants));
  s.state_ = SessionState::AwaitingUserApproval;
  return s;
}

SigningSession SigningSession::start(const DistributedKey& key, const SignatureSuite& suite, const Hash32& message_hash,
                                     const std::set<std::uint32_t>& responsive_qtsps, RandomSource& rng) {
  SessionId id{};
  rng.fill(id);
  return start(key, suite, message_hash, responsive_qtsps, id);
}

void SigningSession::require_state(SessionState expected, const char* op) const {
  if (state_ != expected) {
    throw Error(ErrorCode::StateViolation, std::string(op) + " is not allowed in state " + std::string(to_string(state_)),
                {std::string(to_string(state_))});
  }
}

bool SigningSession::is_participant(const Holder& h) const {
  for (const auto& p : participants_) {
    if (p == h) return true;
  }
  return false;
}

void SigningSession::require_participant(const Holder& h, const char* op) const {
  if (!is_participant(h)) {
    throw Error(ErrorCode::ProtocolViolation, std::string(op) + " from non-participant " + h.name(), {h.name()});
  }
}

std::vector<std::uint32_t> SigningSession::qtsp_participants() const {
  std::vector<std::uint32_t> out;
  for (const auto& p : participants_) {
    if (!p.is_user()) out.push_back(p.index);
  }
  return out;
}

FieldElement SigningSession::weight(const Holder& h) const {
  const BigInt& q = suite_.require_group().order();
  if (h.is_user()) return FieldElement(1, q);
  auto idx = qtsp_participants();
  return lagrange_coefficient(idx, h.index, q);
}

void SigningSession::approve(Decision decision, ledger::SigningLedger* ledger) {
  require_state(SessionState::AwaitingUserApproval, "approve");
  if (decision == Decision::Approve) {
    state_ = SessionState::NonceCommitment;
    return;
  }
  state_ = SessionState::Aborted;
  abort_reason_ = AbortReason::UserDenied;
  if (ledger) {
    ledger->append({ledger::EntryKind::SessionDenied, session_id_, message_hash_, suite_.suite_id, qtsp_participants(),
                    std::nullopt});
  }
}

void SigningSession::contribute_nonce(const Holder& holder, const Element& commitment) {
  require_state(SessionState::NonceCommitment, "nonce commitment");
  require_participant(holder, "nonce commitment");
  if (commitments_.count(holder)) {
    throw Error(ErrorCode::ProtocolViolation, "duplicate nonce commitment from " + holder.name(), {holder.name()});
  }
  const Group& g = suite_.require_group();
  Element decoded;
  try {
    decoded = g.decode(commitment.encoding);
  } catch (const Error&) {
    throw Error(ErrorCode::ProtocolViolation, "malformed nonce commitment from " + holder.name(), {holder.name()});
  }
  if (g.is_identity(decoded)) {
    throw Error(ErrorCode::ProtocolViolation, "identity nonce commitment from " + holder.name(), {holder.name()});
  }
  commitments_.emplace(holder, decoded);
  if (commitments_.size() < participants_.size()) return;

  Element r = g.identity();
  for (const auto& [_, c] : commitments_) r = g.op(r, c);
  aggregate_commitment_ = r;
  challenge_ = schnorr_challenge(suite_, session_id_, r, key_.group_public_key, message_hash_);
  state_ = SessionState::PartialSigning;
}

void SigningSession::contribute_partial(const Holder& holder, const FieldElement& z) {
  require_state(SessionState::PartialSigning, "partial signature");
  require_participant(holder, "partial signature");
  if (partials_.count(holder)) {
    throw Error(ErrorCode::ProtocolViolation, "duplicate partial signature from " + holder.name(), {holder.name()});
  }
  const Group& g = suite_.require_group();
  const Element& public_share = holder.is_user() ? key_.user_public_share : key_.qtsp_public_shares.at(holder.index);
  bool ok = z.modulus() == g.order() &&
            g.exp_generator(z) == g.op(commitments_.at(holder), g.exp(public_share, *challenge_ * weight(holder)));
  if (!ok) {
    misbehaving_ = holder;
    state_ = SessionState::Aborted;
    abort_reason_ = AbortReason::Misbehavior;
    throw Error(ErrorCode::Misbehavior, "partial signature from " + holder.name() + " failed verification",
                {holder.name()});
  }
  partials_.emplace(holder, z);
}

Signature SigningSession::aggregate(ledger::SigningLedger& ledger) {
  require_state(SessionState::PartialSigning, "aggregate");
  if (partials_.size() < participants_.size()) {
    std::vector<std::string> missing;
    for (const auto& p : participants_) {
      if (!partials_.count(p)) missing.push_back(p.name());
    }
    throw Error(ErrorCode::NotReady, "partial signatures missing", missing);
  }
  const Group& g = suite_.require_group();
  FieldElement z(0, g.order());
  for (const auto& [_, zi] : partials_) z += zi;
  Signature sig = encode_schnorr(suite_, {*aggregate_commitment_, z});
  if (!schnorr_verify(suite_, key_.group_public_key, message_hash_, sig, session_id_)) {
    state_ = SessionState::Aborted;
    abort_reason_ = AbortReason::Misbehavior;
    throw Error(ErrorCode::Misbehavior, "aggregate signature failed verification");
  }
  state_ = SessionState::Aggregated;
  try {
    ledger.append({ledger::EntryKind::SessionCompleted, session_id_, message_hash_, suite_.suite_id,
                   qtsp_participants(), sig.to_wire()});
  } catch (const Error&) {
    state_ = SessionState::Aborted;
    abort_reason_ = AbortReason::LedgerUnavailable;
    throw Error(ErrorCode::LedgerUnavailable, "signing ledger unavailable; signature withheld");
  }
  signature_ = sig;
  state_ = SessionState::Completed;
  return sig;
}

void SigningSession::abort(AbortReason reason, ledger::SigningLedger* ledger) {
  if (terminal()) throw Error(ErrorCode::StateViolation, "session already " + std::string(to_string(state_)));
  state_ = SessionState::Aborted;
  abort_reason_ = reason;
  if (!ledger) return;
  try {
    ledger->append({ledger::EntryKind::SessionAborted, session_id_, message_hash_, suite_.suite_id,
                    qtsp_participants(), std::nullopt});
  } catch (const Error&) {
  }
}

}  // namespace qoesign::protocol
