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

#include "qoesign/protocol/signer.hpp"

#include "qoesign/suite/schnorr.hpp"

namespace qoesign::protocol {

namespace {

Error violation(const Holder& h, const std::string& why) {
  return Error(ErrorCode::ProtocolViolation, h.name() + " refuses: " + why, {h.name()});
}

}  // namespace

SignerNode::SignerNode(KeyShare share, DistributedKey key, SignatureSuite suite, RandomSource& rng)
    : share_(std::move(share)), key_(std::move(key)), suite_(std::move(suite)), rng_(&rng) {
  if (share_.suite_id != key_.suite_id || key_.suite_id != suite_.suite_id) {
    throw Error(ErrorCode::Parameter, "share, key and suite disagree on the suite id");
  }
}

void SignerNode::install(KeyShare share, DistributedKey key, SignatureSuite suite) {
  if (share.holder != share_.holder) throw Error(ErrorCode::Parameter, "share belongs to another holder");
  share_ = std::move(share);
  key_ = std::move(key);
  suite_ = std::move(suite);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    it = it->second.answered_z ? std::next(it) : sessions_.erase(it);
  }
}

void SignerNode::authorize(const NonceRequest&) const {}

Element SignerNode::commit_nonce(const NonceRequest& request) {
  const Holder& me = holder();
  if (request.suite_id != suite_.suite_id) throw violation(me, "session is for suite " + request.suite_id);
  if (request.epoch != share_.epoch) {
    throw violation(me, "session epoch " + std::to_string(request.epoch) + " but share epoch " +
                            std::to_string(share_.epoch));
  }
  bool listed = false;
  for (const auto& p : request.participants) listed = listed || p == me;
  if (!listed) throw violation(me, "not a participant");
  require_signing_allowed(suite_);
  authorize(request);

  auto it = sessions_.find(request.session_id);
  if (it != sessions_.end()) {
    if (it->second.message_hash != request.message_hash || it->second.participants != request.participants) {
      throw violation(me, "session id reused with different parameters");
    }
    return it->second.commitment;
  }
  const Group& g = suite_.require_group();
  NonceState st;
  st.message_hash = request.message_hash;
  st.participants = request.participants;
  st.nonce = rng_->draw_scalar(g.order(), true);
  st.commitment = g.exp_generator(*st.nonce);
  Element out = st.commitment;
  sessions_.emplace(request.session_id, std::move(st));
  return out;
}

FieldElement SignerNode::sign_partial(const SessionId& session_id, const std::map<Holder, Element>& commitments) {
  const Holder& me = holder();
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw violation(me, "no nonce committed for this session");
  NonceState& st = it->second;
  if (st.answered_commitments) {
    if (*st.answered_commitments == commitments) return *st.answered_z;
    throw violation(me, "nonce already used with a different commitment set");
  }
  if (commitments.size() != st.participants.size()) throw violation(me, "commitment set does not match participants");
  for (const auto& p : st.participants) {
    if (!commitments.count(p)) throw violation(me, "commitment missing for " + p.name());
  }
  if (commitments.at(me) != st.commitment) throw violation(me, "own commitment was altered");

  const Group& g = suite_.require_group();
  Element r = g.identity();
  for (const auto& [_, c] : commitments) r = g.op(r, g.decode(c.encoding));
  FieldElement c = schnorr_challenge(suite_, session_id, r, key_.group_public_key, st.message_hash);
  FieldElement w(1, g.order());
  if (!me.is_user()) {
    std::vector<std::uint32_t> idx;
    for (const auto& p : st.participants) {
      if (!p.is_user()) idx.push_back(p.index);
    }
    w = lagrange_coefficient(idx, me.index, g.order());
  }
  FieldElement z = *st.nonce + c * w * share_.secret;
  st.nonce.reset();
  st.answered_commitments = commitments;
  st.answered_z = z;
  return z;
}

void UserSigner::record_decision(const SessionId& session_id, const Hash32& message_hash, Decision decision) {
  approvals_.push_back({session_id, message_hash, decision == Decision::Approve});
}

bool UserSigner::approved(const SessionId& session_id, const Hash32& message_hash) const {
  bool ok = false;
  for (const auto& a : approvals_) {
    if (a.session_id != session_id) continue;
    if (!a.approved) return false;
    ok = ok || a.message_hash == message_hash;
  }
  return ok;
}

void UserSigner::authorize(const NonceRequest& request) const {
  if (!approved(request.session_id, request.message_hash)) {
    throw violation(holder(), "session " + to_hex(request.session_id) + " was not approved by the user");
  }
}

}  // namespace qoesign::protocol
