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

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "qoesign/service/config.hpp"
#include "qoesign/service/keystore.hpp"
#include "qoesign/service/peers.hpp"

namespace qoesign::service {

// Public view of a session. Never carries share, nonce or partial material.
struct SessionView {
  std::string session_id;  // hex; also the signing context
  std::string user_id;
  std::string state;
  std::string message_hash;
  std::string fingerprint;
  std::string suite_id;
  std::vector<std::uint32_t> participants;
  std::optional<std::string> abort_reason;
  std::optional<std::string> signature;  // hex wire form, Completed only
};

struct PublicKeyView {
  std::string user_id;
  std::string suite_id;
  std::string public_key;  // hex
  std::uint32_t epoch = 0;
  std::uint32_t t = 0;
  std::uint32_t n = 0;
};

// "a1b2c3d4 e5f6..." : the message hash as 8 words of 8 hex digits, shown to
// the user before approval.
std::string fingerprint(const Hash32& message_hash);

// Canonical request string the user's approval tag covers.
Bytes approval_tag_input(std::uint64_t seq, std::string_view path, std::string_view body);
Hash32 approval_tag(const Hash32& auth_key, std::uint64_t seq, std::string_view path, std::string_view body);

// Trusted setup for every configured user without key material. Returns the
// users provisioned by this call.
std::vector<std::string> provision_missing_users(const ServiceConfig& config);

// Drives signing sessions for every provisioned user. Each session is
// mutated only under its own lock; ledger appends serialize per user inside
// SigningLedger. The user's share stays sealed until the first authenticated
// approval and is then held by that user's node.
class CoordinatorService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  // Provisions configured users that lack key material, then builds the
  // peer transport for the configured mode.
  static std::unique_ptr<CoordinatorService> open(const ServiceConfig& config);
  CoordinatorService(const ServiceConfig& config, std::unique_ptr<PeerTransport> peers, Clock clock = {});
  ~CoordinatorService();

  // Pings every QTSP and opens a session awaiting the user's decision.
  // NotFound for unknown users, Validation for a malformed hash, SuiteRefused
  // when suite_id names another or a retired suite, InsufficientQuorum when
  // too few QTSPs answer.
  SessionView create_session(const std::string& user_id, const std::string& message_hash_hex,
                             const std::optional<std::string>& suite_id = std::nullopt);

  // The user's decision. Approve runs both signing rounds before returning.
  // StateViolation unless the session awaits approval (so a repeat never
  // signs twice). An expired session is aborted as user_unavailable.
  SessionView decide(const std::string& session_id_hex, protocol::Decision decision);

  SessionView get(const std::string& session_id_hex);
  std::vector<ledger::LedgerEntry> ledger_entries(const std::string& user_id);
  PublicKeyView public_key(const std::string& user_id);

  // Checks a user's approval tag. Each sequence number is accepted once per
  // user, within a sliding window of the most recent ones. Throws
  // Unauthenticated.
  void authenticate(const std::string& user_id, std::uint64_t seq, std::string_view path, std::string_view body,
                    std::string_view tag_hex);
  // Owner of a session; NotFound otherwise.
  std::string session_owner(const std::string& session_id_hex);

  const ServiceConfig& config() const { return config_; }
  PeerTransport& peers() { return *peers_; }
  const SuiteRegistry& registry() const { return registry_; }

 private:
  struct UserState;
  struct SessionSlot;

  UserState& user(const std::string& user_id);
  std::shared_ptr<SessionSlot> slot(const std::string& session_id_hex);
  protocol::UserSigner& user_node(UserState& u);
  void run_rounds(SessionSlot& s, UserState& u);
  SessionView view(const SessionSlot& s) const;
  void expire_if_stale(SessionSlot& s, UserState& u);

  ServiceConfig config_;
  KeyStore store_;
  SuiteRegistry registry_;
  std::unique_ptr<PeerTransport> peers_;
  Clock clock_;

  std::mutex rng_mutex_;
  std::unique_ptr<RandomSource> rng_;

  std::shared_mutex users_mutex_;
  std::map<std::string, std::unique_ptr<UserState>> users_;
  std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
};

}  // namespace qoesign::service
