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

#include <functional>

#include "qoesign/protocol/session.hpp"

namespace qoesign::protocol {

inline constexpr std::string_view kTransitionDomain = "QOESIGN/v1/transition";

// Statement binding a user's new key to the old one, signed under the old key.
struct TransitionRecord {
  std::string old_suite_id;
  std::string new_suite_id;
  Bytes new_public_key;  // canonical encoding under the new suite's group
  std::uint32_t epoch = 0;
  std::uint64_t timestamp = 0;
  SessionId session_id{};
  Signature signature;

  // domain || lp8(old) || lp8(new) || lp8(enc(new PK)) || u32 epoch || u64 timestamp
  Bytes statement() const;
  Hash32 statement_hash() const;
  bool verify(const SuiteRegistry& registry, const Element& old_public_key) const;
};

// Runs one full signing session under the old key and returns it in its
// terminal state. Failures may be reported by throwing or by an Aborted session.
using SessionRunner = std::function<SigningSession(const Hash32& message_hash)>;

struct MigrationResult {
  DkgResult fresh;
  TransitionRecord record;
};

// Fresh DKG under `target_suite_id`, transition statement signed by the old
// key, SuiteMigrated appended, then the old suite marked Deprecated. Any
// failure before the ledger append throws MigrationAbort and changes nothing.
MigrationResult migrate_suite(SuiteRegistry& registry, const DistributedKey& old_key, const std::string& target_suite_id,
                              RandomSource& rng, const SessionRunner& run_under_old_key,
                              ledger::SigningLedger& ledger);

}  // namespace qoesign::protocol
