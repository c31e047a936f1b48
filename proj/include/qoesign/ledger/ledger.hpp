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
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qoesign/bytes.hpp"

namespace qoesign::ledger {

enum class EntryKind : std::uint8_t {
  SessionCompleted = 1,
  SessionDenied = 2,
  SessionAborted = 3,
  SuiteMigrated = 4,
  ShareRefreshed = 5,
};

std::string_view to_string(EntryKind kind);
EntryKind parse_entry_kind(std::string_view s);

// Caller-supplied part of an entry. participants are QTSP indices.
struct EntryFields {
  EntryKind kind = EntryKind::SessionCompleted;
  SessionId session_id{};
  Hash32 message_hash{};
  std::string suite_id;
  std::vector<std::uint32_t> participants;
  std::optional<Bytes> signature;  // Signature wire bytes; present iff SessionCompleted
};

struct LedgerEntry {
  std::uint64_t index = 0;
  Hash32 prev_hash{};
  std::uint64_t timestamp = 0;
  EntryKind kind = EntryKind::SessionCompleted;
  SessionId session_id{};
  Hash32 message_hash{};
  std::string suite_id;
  std::vector<std::uint32_t> participants;
  std::optional<Bytes> signature;
  Hash32 entry_hash{};

  // Canonical encoding of every field except entry_hash. See docs/ledger-format.md.
  Bytes body() const;
  Hash32 compute_hash() const { return crypto_hash(body()); }
  // body || entry_hash
  Bytes encode() const;
  static LedgerEntry decode(ByteView record);

  bool operator==(const LedgerEntry&) const = default;

 private:
  static Hash32 crypto_hash(ByteView data);
};

// Throws Validation when the fields are incomplete for their kind.
void validate_fields(const EntryFields& fields);

// Durable backing for one user's chain. append must be all-or-nothing.
class LedgerStore {
 public:
  virtual ~LedgerStore() = default;
  virtual void append(const LedgerEntry& entry) = 0;
  virtual std::vector<LedgerEntry> load() const = 0;
};

class MemoryLedgerStore final : public LedgerStore {
 public:
  void append(const LedgerEntry& entry) override { entries_.push_back(entry); }
  std::vector<LedgerEntry> load() const override { return entries_; }

 private:
  std::vector<LedgerEntry> entries_;
};

// Append-only file of u32 big-endian length-prefixed encoded entries.
class FileLedgerStore final : public LedgerStore {
 public:
  explicit FileLedgerStore(std::string path);
  void append(const LedgerEntry& entry) override;
  std::vector<LedgerEntry> load() const override;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

using Clock = std::function<std::uint64_t()>;
Clock system_clock();
// Always returns `seconds`.
Clock fixed_clock(std::uint64_t seconds);

// One user's hash chain. A single writer appends; readers get a consistent
// snapshot. A store failure leaves the in-memory head untouched and surfaces
// as Error(LedgerUnavailable).
class SigningLedger {
 public:
  SigningLedger(std::string user_id, std::unique_ptr<LedgerStore> store, Clock clock = system_clock());

  LedgerEntry append(const EntryFields& fields);
  std::vector<LedgerEntry> entries() const;
  std::size_t size() const;
  Hash32 head_hash() const;
  const std::string& user_id() const { return user_id_; }
  std::uint64_t now() const { return clock_(); }

 private:
  std::string user_id_;
  std::unique_ptr<LedgerStore> store_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::vector<LedgerEntry> entries_;
};

struct ChainVerdict {
  bool ok = true;
  std::uint64_t first_bad_index = 0;
  std::string reason;  // "index-gap", "link-mismatch", "hash-mismatch", "invalid-fields"

  static ChainVerdict Ok() { return {}; }
  static ChainVerdict Broken(std::uint64_t index, std::string reason) { return {false, index, std::move(reason)}; }
};

// Recomputes every hash and link; reports the first violation by position.
ChainVerdict verify_chain(const std::vector<LedgerEntry>& entries);

// The user node's own record of what it approved or denied.
struct ApprovalRecord {
  SessionId session_id{};
  Hash32 message_hash{};
  bool approved = false;
};

struct AuditDiscrepancy {
  std::uint64_t index = 0;
  SessionId session_id{};
  std::string reason;  // "no-local-approval", "message-mismatch", "denied-locally"
};

// Flags every SessionCompleted entry the user did not approve for that
// exact message.
std::vector<AuditDiscrepancy> user_audit(const std::vector<LedgerEntry>& entries,
                                         const std::vector<ApprovalRecord>& approvals);

// Export form used by the service API.
std::string entries_to_json(const std::vector<LedgerEntry>& entries);
// SHA-256 over the concatenated encodings; a compact digest for transcripts.
Hash32 ledger_digest(const std::vector<LedgerEntry>& entries);

}  // namespace qoesign::ledger
