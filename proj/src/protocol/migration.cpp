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

#include "qoesign/protocol/migration.hpp"

#include "qoesign/crypto.hpp"
#include "qoesign/suite/schnorr.hpp"

namespace qoesign::protocol {

Bytes TransitionRecord::statement() const {
  ByteWriter w;
  w.raw(as_bytes(kTransitionDomain))
      .lp8(as_bytes(old_suite_id))
      .lp8(as_bytes(new_suite_id))
      .lp8(new_public_key)
      .u32(epoch)
      .u64(timestamp);
  return std::move(w).take();
}

Hash32 TransitionRecord::statement_hash() const { return crypto::sha256(statement()); }

bool TransitionRecord::verify(const SuiteRegistry& registry, const Element& old_public_key) const {
  if (signature.suite_id != old_suite_id) return false;
  SignatureSuite old_suite = registry.resolve(old_suite_id);
  return schnorr_verify(old_suite, old_public_key, statement_hash(), signature, session_id);
}

MigrationResult migrate_suite(SuiteRegistry& registry, const DistributedKey& old_key, const std::string& target_suite_id,
                              RandomSource& rng, const SessionRunner& run_under_old_key,
                              ledger::SigningLedger& ledger) {
  if (target_suite_id == old_key.suite_id) {
    throw Error(ErrorCode::Parameter, "key already uses suite " + target_suite_id);
  }
  SignatureSuite target = registry.resolve(target_suite_id);
  if (!target.threshold_capable || target.status != SuiteStatus::Active) {
    throw Error(ErrorCode::Parameter, "migration target " + target_suite_id + " must be threshold-capable and active");
  }
  SignatureSuite old_suite = registry.resolve(old_key.suite_id);

  MigrationResult out;
  out.fresh = dkg(old_key.access, target, rng);
  std::uint32_t epoch = old_key.epoch + 1;
  out.fresh.key.epoch = epoch;
  out.fresh.user_share.epoch = epoch;
  for (auto& s : out.fresh.qtsp_shares) s.epoch = epoch;

  TransitionRecord& rec = out.record;
  rec.old_suite_id = old_key.suite_id;
  rec.new_suite_id = target_suite_id;
  rec.new_public_key = out.fresh.key.group_public_key.encoding;
  rec.epoch = epoch;
  rec.timestamp = ledger.now();

  try {
    SigningSession session = run_under_old_key(rec.statement_hash());
    if (session.state() != SessionState::Completed || !session.signature()) {
      throw Error(ErrorCode::MigrationAbort,
                  "transition session ended " + std::string(to_string(session.state())) + " (" +
                      std::string(to_string(session.abort_reason())) + ")",
                  {std::string(to_string(session.abort_reason()))});
    }
    if (session.message_hash() != rec.statement_hash()) {
      throw Error(ErrorCode::MigrationAbort, "transition session signed a different statement");
    }
    rec.session_id = session.session_id();
    rec.signature = *session.signature();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MigrationAbort) throw;
    throw Error(ErrorCode::MigrationAbort, std::string("transition session failed: ") + e.what(),
                {std::string(to_string(e.code()))});
  }
  if (!schnorr_verify(old_suite, old_key.group_public_key, rec.statement_hash(), rec.signature, rec.session_id)) {
    throw Error(ErrorCode::MigrationAbort, "transition signature does not verify under the old key");
  }

  try {
    ledger.append({ledger::EntryKind::SuiteMigrated, rec.session_id, rec.statement_hash(), target_suite_id,
                   out.fresh.key.qtsp_indices(), std::nullopt});
  } catch (const Error& e) {
    throw Error(ErrorCode::MigrationAbort, std::string("ledger refused the migration record: ") + e.what());
  }
  registry.set_status(old_key.suite_id, SuiteStatus::Deprecated);
  return out;
}

}  // namespace qoesign::protocol
