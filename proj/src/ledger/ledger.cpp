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

#include "qoesign/ledger/ledger.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "qoesign/crypto.hpp"

namespace qoesign::ledger {

std::string_view to_string(EntryKind kind) {
  switch (kind) {
    case EntryKind::SessionCompleted: return "session_completed";
    case EntryKind::SessionDenied: return "session_denied";
    case EntryKind::SessionAborted: return "session_aborted";
    case EntryKind::SuiteMigrated: return "suite_migrated";
    case EntryKind::ShareRefreshed: return "share_refreshed";
  }
  return "unknown";
}

EntryKind parse_entry_kind(std::string_view s) {
  for (auto k : {EntryKind::SessionCompleted, EntryKind::SessionDenied, EntryKind::SessionAborted,
                 EntryKind::SuiteMigrated, EntryKind::ShareRefreshed}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::Decode, "unknown ledger entry kind: " + std::string(s));
}

namespace {

bool known_kind(std::uint8_t v) { return v >= 1 && v <= 5; }

std::string fields_problem(EntryKind kind, const std::string& suite_id, const std::vector<std::uint32_t>& participants,
                           const std::optional<Bytes>& signature) {
  if (!known_kind(static_cast<std::uint8_t>(kind))) return "unknown entry kind";
  if (suite_id.empty() || suite_id.size() > 255) return "suite_id must be 1..255 bytes";
  for (std::size_t i = 0; i < participants.size(); ++i) {
    if (participants[i] == 0) return "participant index 0 is reserved";
    if (i > 0 && participants[i] <= participants[i - 1]) return "participants must be strictly ascending";
  }
  bool needs_signature = kind == EntryKind::SessionCompleted;
  if (needs_signature && (!signature || signature->empty())) return "session_completed requires a signature";
  if (!needs_signature && signature) return "only session_completed carries a signature";
  return {};
}

}  // namespace

void validate_fields(const EntryFields& f) {
  std::string problem = fields_problem(f.kind, f.suite_id, f.participants, f.signature);
  if (!problem.empty()) throw Error(ErrorCode::Validation, "ledger entry: " + problem, {std::string(to_string(f.kind))});
}

Hash32 LedgerEntry::crypto_hash(ByteView data) { return crypto::sha256(data); }

Bytes LedgerEntry::body() const {
  ByteWriter w;
  w.u64(index).raw(prev_hash).u64(timestamp).u8(static_cast<std::uint8_t>(kind)).raw(session_id).raw(message_hash);
  w.lp8(as_bytes(suite_id));
  w.u32(static_cast<std::uint32_t>(participants.size()));
  for (auto p : participants) w.u32(p);
  if (signature) {
    w.u8(1).lp32(*signature);
  } else {
    w.u8(0);
  }
  return std::move(w).take();
}

Bytes LedgerEntry::encode() const {
  Bytes out = body();
  out.insert(out.end(), entry_hash.begin(), entry_hash.end());
  return out;
}

LedgerEntry LedgerEntry::decode(ByteView record) {
  ByteReader r(record);
  LedgerEntry e;
  e.index = r.u64();
  e.prev_hash = r.fixed<32>();
  e.timestamp = r.u64();
  std::uint8_t kind = r.u8();
  if (!known_kind(kind)) throw Error(ErrorCode::Decode, "unknown ledger entry kind " + std::to_string(kind));
  e.kind = static_cast<EntryKind>(kind);
  e.session_id = r.fixed<16>();
  e.message_hash = r.fixed<32>();
  auto id = r.lp8();
  e.suite_id.assign(id.begin(), id.end());
  std::uint32_t count = r.u32();
  if (count > r.remaining() / 4) throw Error(ErrorCode::Decode, "participant count exceeds record");
  for (std::uint32_t i = 0; i < count; ++i) e.participants.push_back(r.u32());
  std::uint8_t flag = r.u8();
  if (flag > 1) throw Error(ErrorCode::Decode, "bad signature flag");
  if (flag == 1) {
    auto sig = r.lp32();
    e.signature = Bytes(sig.begin(), sig.end());
  }
  e.entry_hash = r.fixed<32>();
  r.expect_end();
  return e;
}

FileLedgerStore::FileLedgerStore(std::string path) : path_(std::move(path)) {}

void FileLedgerStore::append(const LedgerEntry& entry) {
  Bytes record = entry.encode();
  ByteWriter w;
  w.lp32(record);
  const Bytes& framed = w.bytes();
  std::FILE* f = std::fopen(path_.c_str(), "ab");
  if (!f) throw Error(ErrorCode::LedgerUnavailable, "cannot open ledger file " + path_);
  bool ok = std::fwrite(framed.data(), 1, framed.size(), f) == framed.size();
  ok = std::fflush(f) == 0 && ok;
  ok = ::fsync(::fileno(f)) == 0 && ok;  // durable before the signature is released
  ok = std::fclose(f) == 0 && ok;
  if (!ok) throw Error(ErrorCode::LedgerUnavailable, "short write to ledger file " + path_);
}

std::vector<LedgerEntry> FileLedgerStore::load() const {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return {};
  Bytes data;
  try {
    if (!std::filesystem::is_regular_file(path_)) throw std::runtime_error("not a regular file");
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open");
    data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::LedgerUnavailable, "cannot read ledger " + path_ + ": " + e.what(), {path_});
  }
  ByteReader r(data);
  std::vector<LedgerEntry> out;
  while (r.remaining() > 0) out.push_back(LedgerEntry::decode(r.lp32()));
  return out;
}

Clock system_clock() {
  return [] {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
  };
}

Clock fixed_clock(std::uint64_t seconds) {
  return [seconds] { return seconds; };
}

SigningLedger::SigningLedger(std::string user_id, std::unique_ptr<LedgerStore> store, Clock clock)
    : user_id_(std::move(user_id)), store_(std::move(store)), clock_(std::move(clock)) {
  if (!store_) throw Error(ErrorCode::Parameter, "ledger needs a store");
  entries_ = store_->load();
}

LedgerEntry SigningLedger::append(const EntryFields& fields) {
  validate_fields(fields);
  std::lock_guard lock(mutex_);
  LedgerEntry e;
  e.index = entries_.size();
  e.prev_hash = entries_.empty() ? Hash32{} : entries_.back().entry_hash;
  e.timestamp = clock_();
  e.kind = fields.kind;
  e.session_id = fields.session_id;
  e.message_hash = fields.message_hash;
  e.suite_id = fields.suite_id;
  e.participants = fields.participants;
  e.signature = fields.signature;
  e.entry_hash = e.compute_hash();
  try {
    store_->append(e);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::LedgerUnavailable) throw;
    throw Error(ErrorCode::LedgerUnavailable, std::string("ledger store failed: ") + err.what());
  } catch (const std::exception& err) {
    throw Error(ErrorCode::LedgerUnavailable, std::string("ledger store failed: ") + err.what());
  }
  entries_.push_back(e);
  return e;
}

std::vector<LedgerEntry> SigningLedger::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t SigningLedger::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

Hash32 SigningLedger::head_hash() const {
  std::lock_guard lock(mutex_);
  return entries_.empty() ? Hash32{} : entries_.back().entry_hash;
}

ChainVerdict verify_chain(const std::vector<LedgerEntry>& entries) {
  Hash32 expected_prev{};
  for (std::size_t pos = 0; pos < entries.size(); ++pos) {
    const LedgerEntry& e = entries[pos];
    if (e.index != pos) return ChainVerdict::Broken(pos, "index-gap");
    if (e.prev_hash != expected_prev) return ChainVerdict::Broken(pos, "link-mismatch");
    if (e.compute_hash() != e.entry_hash) return ChainVerdict::Broken(pos, "hash-mismatch");
    if (!fields_problem(e.kind, e.suite_id, e.participants, e.signature).empty()) {
      return ChainVerdict::Broken(pos, "invalid-fields");
    }
    expected_prev = e.entry_hash;
  }
  return ChainVerdict::Ok();
}

std::vector<AuditDiscrepancy> user_audit(const std::vector<LedgerEntry>& entries,
                                         const std::vector<ApprovalRecord>& approvals) {
  std::vector<AuditDiscrepancy> out;
  for (const auto& e : entries) {
    if (e.kind != EntryKind::SessionCompleted) continue;
    bool denied = false;
    bool approved_same = false;
    bool approved_other = false;
    for (const auto& a : approvals) {
      if (a.session_id != e.session_id) continue;
      if (!a.approved) denied = true;
      else if (a.message_hash == e.message_hash) approved_same = true;
      else approved_other = true;
    }
    if (denied) out.push_back({e.index, e.session_id, "denied-locally"});
    else if (approved_same) continue;
    else if (approved_other) out.push_back({e.index, e.session_id, "message-mismatch"});
    else out.push_back({e.index, e.session_id, "no-local-approval"});
  }
  return out;
}

std::string entries_to_json(const std::vector<LedgerEntry>& entries) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["index"] = e.index;
    j["prev_hash"] = to_hex(e.prev_hash);
    j["timestamp"] = e.timestamp;
    j["kind"] = std::string(to_string(e.kind));
    j["session_id"] = to_hex(e.session_id);
    j["message_hash"] = to_hex(e.message_hash);
    j["suite_id"] = e.suite_id;
    j["participants"] = e.participants;
    j["signature"] = e.signature ? nlohmann::ordered_json(to_hex(*e.signature)) : nlohmann::ordered_json(nullptr);
    j["entry_hash"] = to_hex(e.entry_hash);
    arr.push_back(std::move(j));
  }
  return arr.dump();
}

Hash32 ledger_digest(const std::vector<LedgerEntry>& entries) {
  crypto::Sha256 h;
  for (const auto& e : entries) h.update(e.encode());
  return h.finish();
}

}  // namespace qoesign::ledger
