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

#include "qoesign/protocol/local_cluster.hpp"

#include "qoesign/crypto.hpp"

namespace qoesign::protocol {

LocalCluster::LocalCluster(SuiteRegistry& registry, Options options, ledger::SigningLedger& ledger)
    : registry_(&registry), ledger_(&ledger), seed_(options.seed) {
  SignatureSuite s = registry.resolve(options.suite_id);
  std::vector<RandomSource*> dealer_rngs;
  for (std::uint32_t j = 1; j <= options.access.n; ++j) dealer_rngs.push_back(&rng_for("qtsp-" + std::to_string(j)));
  DkgResult d = dkg(options.access, s, rng_for("user"), dealer_rngs);
  key_ = d.key;
  user_ = std::make_unique<UserSigner>(d.user_share, d.key, s, rng_for("user"));
  for (auto& share : d.qtsp_shares) {
    auto& rng = rng_for(share.holder.name());
    qtsps_.push_back(std::make_unique<SignerNode>(std::move(share), d.key, s, rng));
  }
}

RandomSource& LocalCluster::rng_for(const std::string& label) {
  auto it = rngs_.find(label);
  if (it != rngs_.end()) return *it->second;
  std::unique_ptr<RandomSource> rng;
  if (seed_) rng = std::make_unique<SeededRandom>(*seed_, label);
  else rng = std::make_unique<SystemRandom>();
  return *rngs_.emplace(label, std::move(rng)).first->second;
}

std::set<std::uint32_t> LocalCluster::all_qtsps() const {
  std::set<std::uint32_t> out;
  for (std::uint32_t i = 1; i <= key_.access.n; ++i) out.insert(i);
  return out;
}

SigningSession LocalCluster::sign(const Hash32& message_hash, const std::set<std::uint32_t>& responsive,
                                  Decision decision) {
  SignatureSuite s = suite();
  SigningSession session = SigningSession::start(key_, s, message_hash, responsive, rng_for("coordinator"));
  user_->record_decision(session.session_id(), message_hash, decision);
  session.approve(decision, ledger_);
  if (session.terminal()) return session;

  NonceRequest request{session.session_id(), message_hash, s.suite_id, key_.epoch, session.participants()};
  auto node_for = [this](const Holder& h) -> SignerNode& { return h.is_user() ? *user_ : qtsp(h.index); };
  for (const auto& h : session.participants()) session.contribute_nonce(h, node_for(h).commit_nonce(request));
  try {
    for (const auto& h : session.participants()) {
      session.contribute_partial(h, node_for(h).sign_partial(session.session_id(), session.commitments()));
    }
    session.aggregate(*ledger_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Misbehavior && e.code() != ErrorCode::LedgerUnavailable) throw;
  }
  return session;
}

void LocalCluster::refresh() {
  SignatureSuite s = suite();
  std::vector<KeyShare> shares;
  for (const auto& node : qtsps_) shares.push_back(node->share());
  RefreshResult r = refresh_shares(key_, s, user_->share(), shares, rng_for("refresh"));
  ByteWriter w;
  w.raw(as_bytes("QOESIGN/v1/refresh")).u32(r.key.epoch).raw(r.key.group_public_key.encoding);
  ledger_->append({ledger::EntryKind::ShareRefreshed, SessionId{}, crypto::sha256(w.bytes()), s.suite_id,
                   r.key.qtsp_indices(), std::nullopt});
  key_ = r.key;
  user_->install(r.user_share, r.key, s);
  for (std::size_t i = 0; i < qtsps_.size(); ++i) qtsps_[i]->install(r.qtsp_shares[i], r.key, s);
}

TransitionRecord LocalCluster::migrate(const std::string& target_suite_id, const std::set<std::uint32_t>& responsive) {
  auto runner = [this, &responsive](const Hash32& msg) { return sign(msg, responsive); };
  MigrationResult m = migrate_suite(*registry_, key_, target_suite_id, rng_for("migration"), runner, *ledger_);
  SignatureSuite target = registry_->resolve(target_suite_id);
  key_ = m.fresh.key;
  user_->install(m.fresh.user_share, m.fresh.key, target);
  for (std::size_t i = 0; i < qtsps_.size(); ++i) qtsps_[i]->install(m.fresh.qtsp_shares[i], m.fresh.key, target);
  return m.record;
}

}  // namespace qoesign::protocol
