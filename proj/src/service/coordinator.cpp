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

#include "qoesign/service/coordinator.hpp"

#include <filesystem>

#include "qoesign/crypto.hpp"
#include "qoesign/errors.hpp"

namespace qoesign::service {

using protocol::Decision;
using protocol::Holder;
using protocol::SessionState;
using protocol::SigningSession;

namespace {

std::unique_ptr<RandomSource> make_rng(const std::optional<std::uint64_t>& seed, const std::string& label) {
  if (seed) return std::make_unique<SeededRandom>(*seed, label);
  return std::make_unique<SystemRandom>();
}

Hash32 parse_message_hash(const std::string& hex) {
  bool ok = hex.size() == 64;
  for (char c : hex) ok = ok && ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'));
  if (!ok) throw Error(ErrorCode::Validation, "message_hash must be 64 hex digits", {"message_hash"});
  return fixed_from_hex<32>(hex);
}

SessionId parse_session_id(const std::string& hex) {
  try {
    return fixed_from_hex<16>(hex);
  } catch (const Error&) {
    throw Error(ErrorCode::NotFound, "unknown session '" + hex + "'", {hex});
  }
}

}  // namespace

std::string fingerprint(const Hash32& message_hash) {
  std::string hex = to_hex(message_hash);
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 8) {
    if (!out.empty()) out.push_back(' ');
    out += hex.substr(i, 8);
  }
  return out;
}

Bytes approval_tag_input(std::uint64_t seq, std::string_view path, std::string_view body) {
  ByteWriter w;
  w.raw(as_bytes("QOESIGN/v1/approval")).u64(seq).raw(as_bytes("POST ")).raw(as_bytes(path)).u8('\n').raw(as_bytes(body));
  return std::move(w).take();
}

Hash32 approval_tag(const Hash32& auth_key, std::uint64_t seq, std::string_view path, std::string_view body) {
  return crypto::hmac_sha256(auth_key, approval_tag_input(seq, path, body));
}

std::vector<std::string> provision_missing_users(const ServiceConfig& config) {
  config.validate();
  KeyStore store(config.data_dir);
  SuiteRegistry registry = make_default_registry();
  auto setup_rng = make_rng(config.seed, "service/setup");
  store.transport_secret(*setup_rng);
  std::vector<std::string> created;
  for (const auto& user_id : config.users) {
    if (store.has_user(user_id)) continue;
    const std::string prefix = "keygen/" + user_id + "/";
    auto user_rng = make_rng(config.seed, prefix + "user");
    auto seal_rng = make_rng(config.seed, prefix + "seal");
    std::vector<std::unique_ptr<RandomSource>> dealers;
    std::vector<RandomSource*> dealer_ptrs;
    for (std::uint32_t j = 1; j <= config.n; ++j) {
      dealers.push_back(make_rng(config.seed, prefix + "qtsp-" + std::to_string(j)));
      dealer_ptrs.push_back(dealers.back().get());
    }
    protocol::AccessStructure access{config.t, config.n, true};
    store.provision_user(user_id, access, registry.resolve(config.suite_id), config.user_passphrase(), *user_rng,
                         dealer_ptrs, *seal_rng);
    created.push_back(user_id);
  }
  return created;
}

struct CoordinatorService::UserState {
  std::string user_id;
  protocol::DistributedKey key;
  Hash32 auth_key{};
  std::unique_ptr<ledger::SigningLedger> ledger;

  // Replay window: a sequence number is fresh when above `seq_floor` and not
  // in `recent_seqs`. Concurrent clients may therefore arrive out of order.
  static constexpr std::size_t kReplayWindow = 1024;
  std::mutex auth_mutex;
  std::uint64_t seq_floor = 0;
  std::set<std::uint64_t> recent_seqs;

  std::mutex node_mutex;
  std::unique_ptr<RandomSource> node_rng;
  std::unique_ptr<protocol::UserSigner> node;
};

struct CoordinatorService::SessionSlot {
  SessionSlot(std::string user, std::chrono::steady_clock::time_point at, SigningSession sess)
      : user_id(std::move(user)), created(at), session(std::move(sess)) {}

  std::mutex mutex;
  std::string user_id;
  std::chrono::steady_clock::time_point created;
  SigningSession session;
};

std::unique_ptr<CoordinatorService> CoordinatorService::open(const ServiceConfig& config) {
  provision_missing_users(config);
  std::unique_ptr<PeerTransport> peers;
  if (config.mode == Mode::InProcessSim) {
    peers = std::make_unique<InProcessPeers>(config.n, config.data_dir, config.seed);
  } else {
    peers = std::make_unique<HttpPeers>(config.peers, KeyStore(config.data_dir).transport_secret(),
                                        config.peer_timeout_ms);
  }
  return std::make_unique<CoordinatorService>(config, std::move(peers));
}

CoordinatorService::CoordinatorService(const ServiceConfig& config, std::unique_ptr<PeerTransport> peers, Clock clock)
    : config_(config),
      store_(config.data_dir),
      registry_(make_default_registry()),
      peers_(std::move(peers)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      rng_(make_rng(config.seed, "service/coordinator")) {}

CoordinatorService::~CoordinatorService() = default;

CoordinatorService::UserState& CoordinatorService::user(const std::string& user_id) {
  validate_user_id(user_id);
  {
    std::shared_lock lock(users_mutex_);
    auto it = users_.find(user_id);
    if (it != users_.end()) return *it->second;
  }
  std::unique_lock lock(users_mutex_);
  auto it = users_.find(user_id);
  if (it != users_.end()) return *it->second;
  if (!store_.has_user(user_id)) throw Error(ErrorCode::NotFound, "unknown user '" + user_id + "'", {user_id});
  auto u = std::make_unique<UserState>();
  u->user_id = user_id;
  u->key = store_.load_key(user_id, registry_);
  u->auth_key = store_.user_auth_key(user_id);
  std::filesystem::create_directories(std::filesystem::path(store_.ledger_path(user_id)).parent_path());
  u->ledger = std::make_unique<ledger::SigningLedger>(
      user_id, std::make_unique<ledger::FileLedgerStore>(store_.ledger_path(user_id)));
  u->node_rng = make_rng(config_.seed, "service/user/" + user_id);
  return *users_.emplace(user_id, std::move(u)).first->second;
}

protocol::UserSigner& CoordinatorService::user_node(UserState& u) {
  // Caller holds u.node_mutex.
  if (!u.node) {
    protocol::KeyShare share = store_.unseal_user_share(u.user_id, config_.user_passphrase(), registry_);
    u.node = std::make_unique<protocol::UserSigner>(std::move(share), u.key, registry_.resolve(u.key.suite_id),
                                                    *u.node_rng);
  }
  return *u.node;
}

std::shared_ptr<CoordinatorService::SessionSlot> CoordinatorService::slot(const std::string& session_id_hex) {
  parse_session_id(session_id_hex);
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(session_id_hex);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "unknown session '" + session_id_hex + "'", {session_id_hex});
  return it->second;
}

std::string CoordinatorService::session_owner(const std::string& session_id_hex) {
  return slot(session_id_hex)->user_id;
}

SessionView CoordinatorService::view(const SessionSlot& s) const {
  const SigningSession& sess = s.session;
  SessionView v;
  v.session_id = to_hex(sess.session_id());
  v.user_id = s.user_id;
  v.state = std::string(protocol::to_string(sess.state()));
  v.message_hash = to_hex(sess.message_hash());
  v.fingerprint = fingerprint(sess.message_hash());
  v.suite_id = sess.suite_id();
  v.participants = sess.qtsp_participants();
  if (sess.state() == SessionState::Aborted) v.abort_reason = std::string(protocol::to_string(sess.abort_reason()));
  if (sess.state() == SessionState::Completed && sess.signature()) v.signature = to_hex(sess.signature()->to_wire());
  return v;
}

void CoordinatorService::expire_if_stale(SessionSlot& s, UserState& u) {
  if (s.session.state() != SessionState::AwaitingUserApproval) return;
  if (clock_() - s.created < std::chrono::seconds(config_.approval_timeout_s)) return;
  s.session.abort(protocol::AbortReason::UserUnavailable, u.ledger.get());
}

SessionView CoordinatorService::create_session(const std::string& user_id, const std::string& message_hash_hex,
                                               const std::optional<std::string>& suite_id) {
  UserState& u = user(user_id);
  Hash32 message_hash = parse_message_hash(message_hash_hex);
  if (suite_id && *suite_id != u.key.suite_id) {
    throw Error(ErrorCode::SuiteRefused, "user '" + user_id + "' holds a key for suite " + u.key.suite_id,
                {*suite_id});
  }
  SignatureSuite suite = registry_.resolve(u.key.suite_id);

  std::set<std::uint32_t> responsive;
  for (std::uint32_t i = 1; i <= peers_->size(); ++i) {
    if (peers_->ping(i)) responsive.insert(i);
  }

  SessionId sid{};
  {
    std::lock_guard lock(rng_mutex_);
    rng_->fill(sid);
  }
  auto s = std::make_shared<SessionSlot>(user_id, clock_(),
                                         SigningSession::start(u.key, suite, message_hash, responsive, sid));
  SessionView v = view(*s);
  std::unique_lock lock(sessions_mutex_);
  if (!sessions_.emplace(v.session_id, std::move(s)).second) {
    throw Error(ErrorCode::Duplicate, "session id collision", {v.session_id});
  }
  return v;
}

void CoordinatorService::run_rounds(SessionSlot& s, UserState& u) {
  SigningSession& sess = s.session;
  const Group& group = registry_.resolve(sess.suite_id()).require_group();
  protocol::NonceRequest request{sess.session_id(), sess.message_hash(), sess.suite_id(), sess.epoch(),
                                 sess.participants()};

  // A QTSP that cannot be reached or refuses drops the session; a
  // non-canonical reply counts as misbehavior by its sender.
  auto from_peer = [&](auto&& call, auto&& decode) -> std::optional<decltype(decode(Bytes{}))> {
    Bytes reply;
    try {
      reply = call();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotReady && e.code() != ErrorCode::ProtocolViolation) throw;
      sess.abort(protocol::AbortReason::ParticipantDropped, u.ledger.get());
      return std::nullopt;
    }
    try {
      return decode(reply);
    } catch (const Error&) {
      sess.abort(protocol::AbortReason::Misbehavior, u.ledger.get());
      return std::nullopt;
    }
  };

  for (const auto& h : sess.participants()) {
    if (h.is_user()) {
      std::lock_guard lock(u.node_mutex);
      sess.contribute_nonce(h, user_node(u).commit_nonce(request));
      continue;
    }
    auto commitment = from_peer(
        [&] { return peers_->commit_nonce(h.index, u.user_id, request); },
        [&](const Bytes& b) { return group.decode(b); });
    if (!commitment) return;
    sess.contribute_nonce(h, *commitment);
  }

  try {
    for (const auto& h : sess.participants()) {
      if (h.is_user()) {
        std::lock_guard lock(u.node_mutex);
        sess.contribute_partial(h, user_node(u).sign_partial(sess.session_id(), sess.commitments()));
        continue;
      }
      auto z = from_peer(
          [&] { return peers_->sign_partial(h.index, u.user_id, sess.session_id(), sess.commitments()); },
          [&](const Bytes& b) { return group.decode_scalar(b); });
      if (!z) return;
      sess.contribute_partial(h, *z);
    }
    sess.aggregate(*u.ledger);
  } catch (const Error& e) {
    // Both leave the session Aborted with the matching reason.
    if (e.code() != ErrorCode::Misbehavior && e.code() != ErrorCode::LedgerUnavailable) throw;
  }
}

SessionView CoordinatorService::decide(const std::string& session_id_hex, Decision decision) {
  auto s = slot(session_id_hex);
  std::lock_guard lock(s->mutex);
  UserState& u = user(s->user_id);
  expire_if_stale(*s, u);
  if (s->session.state() != SessionState::AwaitingUserApproval) {
    throw Error(ErrorCode::StateViolation,
                "session is " + std::string(protocol::to_string(s->session.state())) + ", not awaiting approval",
                {std::string(protocol::to_string(s->session.state()))});
  }
  {
    std::lock_guard node_lock(u.node_mutex);
    user_node(u).record_decision(s->session.session_id(), s->session.message_hash(), decision);
  }
  s->session.approve(decision, u.ledger.get());
  if (decision == Decision::Approve) {
    try {
      run_rounds(*s, u);
    } catch (...) {
      if (!s->session.terminal()) s->session.abort(protocol::AbortReason::ParticipantDropped, u.ledger.get());
      throw;
    }
  }
  return view(*s);
}

SessionView CoordinatorService::get(const std::string& session_id_hex) {
  auto s = slot(session_id_hex);
  std::lock_guard lock(s->mutex);
  expire_if_stale(*s, user(s->user_id));
  return view(*s);
}

std::vector<ledger::LedgerEntry> CoordinatorService::ledger_entries(const std::string& user_id) {
  return user(user_id).ledger->entries();
}

PublicKeyView CoordinatorService::public_key(const std::string& user_id) {
  UserState& u = user(user_id);
  return {user_id, u.key.suite_id, to_hex(u.key.group_public_key.encoding), u.key.epoch, u.key.access.t,
          u.key.access.n};
}

void CoordinatorService::authenticate(const std::string& user_id, std::uint64_t seq, std::string_view path,
                                      std::string_view body, std::string_view tag_hex) {
  UserState& u = user(user_id);
  Hash32 expected = approval_tag(u.auth_key, seq, path, body);
  Bytes given;
  try {
    given = from_hex(tag_hex);
  } catch (const Error&) {
    given.clear();
  }
  if (!crypto::constant_time_equal(expected, given)) {
    throw Error(ErrorCode::Unauthenticated, "approval tag does not verify for user '" + user_id + "'", {user_id});
  }
  std::lock_guard lock(u.auth_mutex);
  if (seq <= u.seq_floor || !u.recent_seqs.insert(seq).second) {
    throw Error(ErrorCode::Unauthenticated, "approval sequence number replayed", {std::to_string(seq)});
  }
  if (u.recent_seqs.size() > UserState::kReplayWindow) {
    u.seq_floor = *u.recent_seqs.begin();
    u.recent_seqs.erase(u.recent_seqs.begin());
  }
}

}  // namespace qoesign::service
