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

#include "qoesign/sim/simulation.hpp"

#include <deque>

#include "json.hpp"
#include "qoesign/crypto.hpp"
#include "qoesign/errors.hpp"

namespace qoesign::sim {

namespace {

using protocol::Holder;
using protocol::SessionState;
using protocol::SigningSession;

constexpr std::uint64_t kLedgerEpoch = 1700000000;

// Ledger store with an outage switch, used by the LedgerOutage fault.
class SwitchableStore final : public ledger::LedgerStore {
 public:
  explicit SwitchableStore(const bool* failing) : failing_(failing) {}
  void append(const ledger::LedgerEntry& entry) override {
    if (*failing_) throw Error(ErrorCode::Io, "ledger store offline");
    inner_.append(entry);
  }
  std::vector<ledger::LedgerEntry> load() const override { return inner_.load(); }

 private:
  const bool* failing_;
  ledger::MemoryLedgerStore inner_;
};

struct LinkFilter {
  std::optional<NodeId> from;
  std::optional<NodeId> to;
  std::optional<MessageKind> kind;
  std::uint32_t remaining = 1;

  bool matches(const Envelope& env) const {
    if (remaining == 0) return false;
    if (from && *from != env.from) return false;
    if (to && *to != env.to) return false;
    if (kind) {
      try {
        if (ProtocolMessage::decode(env.body).kind != *kind) return false;
      } catch (const Error&) {
        return false;
      }
    }
    return true;
  }
};

std::uint64_t event_rank(EventType t) {
  switch (t) {
    case EventType::Deliver: return 0;
    case EventType::Process: return 1;
    case EventType::Timer: return 2;
  }
  return 3;
}

}  // namespace

// --- EventQueue ------------------------------------------------------------

bool EventQueue::Later::operator()(const Keyed& a, const Keyed& b) const {
  auto key = [](const Keyed& k) {
    return std::tuple(k.ev.time, event_rank(k.ev.type), k.ev.envelope.seq, k.ev.envelope.from, k.ev.envelope.to,
                      k.ev.node, k.insertion);
  };
  return key(a) > key(b);
}

void EventQueue::push(Event ev) { heap_.push({std::move(ev), counter_++}); }

std::uint64_t EventQueue::next_time() const {
  if (heap_.empty()) throw Error(ErrorCode::StateViolation, "event queue is empty");
  return heap_.top().ev.time;
}

Event EventQueue::pop() {
  if (heap_.empty()) throw Error(ErrorCode::StateViolation, "event queue is empty");
  Event ev = heap_.top().ev;
  heap_.pop();
  return ev;
}

std::map<std::string, std::uint64_t> Counters::as_map() const {
  return {{"sent", sent},
          {"delivered", delivered},
          {"dropped", dropped},
          {"rejected_auth", rejected_auth},
          {"rejected_replay", rejected_replay},
          {"rejected_protocol", rejected_protocol},
          {"retransmits", retransmits},
          {"timeouts", timeouts},
          {"restarts", restarts},
          {"max_inbox_depth", max_inbox_depth}};
}

// --- Simulation ------------------------------------------------------------

struct Simulation::Impl {
  enum class CoordPhase { Idle, Discovery, Approval, NonceCommitment, PartialSigning, Done };

  ScenarioConfig config;
  SuiteRegistry registry = make_default_registry();
  SignatureSuite suite;
  std::map<std::string, std::unique_ptr<SeededRandom>> rngs;
  protocol::DistributedKey key;
  std::unique_ptr<protocol::UserSigner> user;
  std::vector<std::unique_ptr<protocol::SignerNode>> qtsps;
  bool ledger_failing = false;
  std::unique_ptr<ledger::SigningLedger> ledger;
  TransportKeys transport_keys;
  std::map<NodeId, Endpoint> endpoints;

  EventQueue queue;
  std::uint64_t now = 0;
  std::uint64_t step_count = 0;
  Counters counters;
  std::vector<Bytes> tap;
  std::uint64_t tap_bytes = 0;

  // Network faults in force.
  std::set<NodeId> dead;
  std::vector<std::set<NodeId>> partitions;
  std::vector<LinkFilter> tamper_filters;
  std::vector<LinkFilter> duplicate_filters;
  std::vector<std::pair<FaultAction, bool>> scheduled;  // fault, fired
  std::set<Phase> phases_seen;

  // Per-node fair inbound queues: one FIFO per sender, served round robin.
  struct Inbox {
    std::map<NodeId, std::deque<Envelope>> by_sender;
    NodeId last_served = 0;
    bool has_last = false;
    std::uint64_t busy_until = 0;
    bool scheduled = false;
    std::size_t depth = 0;
  };
  std::map<NodeId, Inbox> inboxes;

  // Node-side memory of answered approval requests.
  std::map<SessionId, protocol::Decision> user_answers;

  // Coordinator.
  CoordPhase phase = CoordPhase::Idle;
  std::uint32_t request = 0;
  std::uint32_t attempt = 0;
  Hash32 message_hash{};
  std::uint64_t request_started = 0;
  SessionId attempt_sid{};
  std::optional<SigningSession> session;
  std::set<std::uint32_t> responsive;
  std::uint64_t timer_generation = 0;
  std::uint32_t retransmits = 0;
  std::vector<AttemptRecord> attempts;
  std::optional<Outcome> final_outcome;
  std::vector<std::uint64_t> latency;
  std::set<Bytes> commitments_seen;
  bool commitments_unique = true;

  explicit Impl(ScenarioConfig c) : config(std::move(c)), transport_keys(setup_secret(config)) {
    config.validate();
    suite = registry.resolve(config.suite_id);
    protocol::AccessStructure access{config.t, config.n, true};
    std::vector<RandomSource*> dealers;
    for (std::uint32_t j = 1; j <= config.n; ++j) dealers.push_back(&rng(node_name(j)));
    protocol::DkgResult d = protocol::dkg(access, suite, rng("user"), dealers);
    key = d.key;
    user = std::make_unique<protocol::UserSigner>(d.user_share, d.key, suite, rng("user"));
    for (auto& share : d.qtsp_shares) {
      auto& r = rng(share.holder.name());
      qtsps.push_back(std::make_unique<protocol::SignerNode>(std::move(share), d.key, suite, r));
    }
    ledger = std::make_unique<ledger::SigningLedger>("sim-user", std::make_unique<SwitchableStore>(&ledger_failing),
                                                     [this] { return kLedgerEpoch + now; });
    for (NodeId id = 0; id <= config.n; ++id) endpoints.emplace(id, Endpoint(id, transport_keys));
    endpoints.emplace(kCoordinator, Endpoint(kCoordinator, transport_keys));
    for (const auto& f : config.faults) scheduled.emplace_back(f, false);
    fire_step_faults();
    begin_request();
  }

  static Bytes setup_secret(const ScenarioConfig& c) {
    ByteWriter w;
    w.raw(as_bytes("QOESIGN/sim/setup")).u64(c.seed);
    auto h = crypto::sha256(w.bytes());
    return Bytes(h.begin(), h.end());
  }

  SeededRandom& rng(const std::string& label) {
    auto it = rngs.find(label);
    if (it == rngs.end()) it = rngs.emplace(label, std::make_unique<SeededRandom>(config.seed, label)).first;
    return *it->second;
  }

  protocol::SignerNode& node(NodeId id) {
    if (id == kUserNode) return *user;
    if (id == kCoordinator || id > qtsps.size()) throw Error(ErrorCode::Parameter, "no signer " + node_name(id));
    return *qtsps[id - 1];
  }

  // --- network ---

  // The coordinator is colocated with QTSP 1, so that link has no delay.
  std::uint64_t latency_of(NodeId from, NodeId to) const {
    auto is_colocated = [](NodeId a, NodeId b) { return (a == kCoordinator && b == 1) || (a == 1 && b == kCoordinator); };
    if (is_colocated(from, to)) return 0;
    auto k = transport_keys.pair_key(from, to);
    return 1 + k[0] % 3;
  }

  bool link_cut(NodeId a, NodeId b) const {
    for (const auto& p : partitions) {
      if (p.contains(a) != p.contains(b)) return true;
    }
    return false;
  }

  void transmit(Envelope env) {
    counters.sent++;
    tap.push_back(env.body);
    tap_bytes += env.body.size();
    bool duplicate = false;
    for (auto& f : duplicate_filters) {
      if (f.matches(env)) {
        f.remaining--;
        duplicate = true;
        break;
      }
    }
    for (auto& f : tamper_filters) {
      if (f.matches(env)) {
        f.remaining--;
        if (!env.body.empty()) env.body.back() ^= 0x01;
        break;
      }
    }
    std::uint64_t at = now + latency_of(env.from, env.to);
    if (duplicate) queue.push({at, EventType::Deliver, env, 0, 0});
    queue.push({at, EventType::Deliver, std::move(env), 0, 0});
  }

  void send(NodeId from, NodeId to, const ProtocolMessage& msg) {
    if (dead.contains(from)) return;
    transmit(endpoints.at(from).seal(to, msg.encode()));
  }

  ProtocolMessage make(NodeId sender, MessageKind kind, const SessionId& sid, Bytes payload = {}) const {
    return {sid, key.epoch, sender, kind, std::move(payload)};
  }

  void deliver(const Envelope& env, std::vector<TraceEvent>& trace) {
    TraceEvent te{now, "deliver", env.from, env.to, env.seq};
    if (dead.contains(env.to) || link_cut(env.from, env.to)) {
      counters.dropped++;
      te.what = "drop";
      trace.push_back(te);
      return;
    }
    auto it = endpoints.find(env.to);
    if (it == endpoints.end()) {
      counters.dropped++;
      te.what = "drop";
      trace.push_back(te);
      return;
    }
    Verdict v = it->second.open(env, config.transport_auth);
    if (v == Verdict::BadTag) {
      counters.rejected_auth++;
      te.what = "reject-auth";
    } else if (v == Verdict::Replay) {
      counters.rejected_replay++;
      te.what = "reject-replay";
    } else {
      counters.delivered++;
      auto& inbox = inboxes[env.to];
      inbox.by_sender[env.from].push_back(env);
      inbox.depth++;
      counters.max_inbox_depth = std::max<std::uint64_t>(counters.max_inbox_depth, inbox.depth);
      if (!inbox.scheduled) {
        inbox.scheduled = true;
        queue.push({std::max(now, inbox.busy_until), EventType::Process, {}, env.to, 0});
      }
    }
    trace.push_back(te);
  }

  void process(NodeId id, std::vector<TraceEvent>& trace) {
    auto& inbox = inboxes[id];
    inbox.scheduled = false;
    if (inbox.depth == 0) return;
    // Next sender after the one served last, wrapping around.
    auto it = inbox.has_last ? inbox.by_sender.upper_bound(inbox.last_served) : inbox.by_sender.begin();
    while (true) {
      if (it == inbox.by_sender.end()) it = inbox.by_sender.begin();
      if (!it->second.empty()) break;
      ++it;
    }
    Envelope env = std::move(it->second.front());
    it->second.pop_front();
    inbox.depth--;
    inbox.last_served = it->first;
    inbox.has_last = true;
    inbox.busy_until = now + 1;
    if (inbox.depth > 0) {
      inbox.scheduled = true;
      queue.push({inbox.busy_until, EventType::Process, {}, id, 0});
    }
    trace.push_back({now, "process", env.from, env.to, env.seq});
    if (dead.contains(id)) return;

    ProtocolMessage msg;
    try {
      msg = ProtocolMessage::decode(env.body);
      // The transport identity is authoritative; a mismatched inner sender is refused.
      if (msg.sender != env.from) throw Error(ErrorCode::ProtocolViolation, "sender mismatch");
    } catch (const Error&) {
      counters.rejected_protocol++;
      return;
    }
    try {
      if (id == kCoordinator) {
        coordinator_receive(msg);
      } else {
        node_receive(id, msg);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ProtocolViolation && e.code() != ErrorCode::Decode) throw;
      counters.rejected_protocol++;
    }
  }

  // --- share holders ---

  void node_receive(NodeId id, const ProtocolMessage& msg) {
    switch (msg.kind) {
      case MessageKind::Ping:
        send(id, kCoordinator, make(id, MessageKind::Pong, msg.session_id));
        return;
      case MessageKind::ApprovalRequest: {
        if (id != kUserNode) throw Error(ErrorCode::ProtocolViolation, "approval request to a QTSP");
        ByteReader r(msg.payload);
        Hash32 h = r.fixed<32>();
        r.expect_end();
        auto [it, fresh] = user_answers.emplace(msg.session_id, config.user_decision);
        if (fresh) user->record_decision(msg.session_id, h, it->second);
        ByteWriter w;
        w.u8(it->second == protocol::Decision::Approve ? 1 : 0);
        send(id, kCoordinator, make(id, MessageKind::ApprovalResponse, msg.session_id, std::move(w).take()));
        return;
      }
      case MessageKind::NonceRequest: {
        auto req = decode_nonce_request(msg.payload, msg.session_id, msg.epoch);
        Element r = node(id).commit_nonce(req);
        send(id, kCoordinator, make(id, MessageKind::NonceCommit, msg.session_id, r.encoding));
        return;
      }
      case MessageKind::PartialRequest: {
        auto commitments = decode_commitments(msg.payload, *suite.group);
        FieldElement z = node(id).sign_partial(msg.session_id, commitments);
        send(id, kCoordinator, make(id, MessageKind::Partial, msg.session_id, suite.group->encode_scalar(z)));
        return;
      }
      default:
        throw Error(ErrorCode::ProtocolViolation, "unexpected message for a share holder");
    }
  }

  // --- coordinator ---

  void arm_timer() {
    ++timer_generation;
    queue.push({now + kPhaseTimeout, EventType::Timer, {}, kCoordinator, timer_generation});
  }

  void enter_phase(CoordPhase p) {
    phase = p;
    switch (p) {
      case CoordPhase::Discovery: fire_phase_faults(Phase::Discovery); break;
      case CoordPhase::Approval: fire_phase_faults(Phase::Approval); break;
      case CoordPhase::NonceCommitment: fire_phase_faults(Phase::NonceCommitment); break;
      case CoordPhase::PartialSigning: fire_phase_faults(Phase::PartialSigning); break;
      default: break;
    }
  }

  void begin_request() {
    ByteWriter w;
    w.raw(as_bytes("QOESIGN/sim/request")).u64(config.seed).u32(request);
    message_hash = crypto::sha256(w.bytes());
    request_started = now;
    attempt = 0;
    begin_attempt();
  }

  void begin_attempt() {
    ++attempt;
    session.reset();
    responsive.clear();
    retransmits = 0;
    rng("coordinator").fill(attempt_sid);
    enter_phase(CoordPhase::Discovery);
    for (NodeId i = 1; i <= config.n; ++i) send(kCoordinator, i, make(kCoordinator, MessageKind::Ping, attempt_sid));
    arm_timer();
  }

  void record_attempt() {
    AttemptRecord rec;
    rec.request = request;
    rec.session_id = attempt_sid;
    rec.started_at = request_started;
    rec.finished_at = now;
    if (session) {
      rec.participants = session->participants();
      rec.state = session->state();
      rec.abort_reason = session->abort_reason();
      rec.misbehaving = session->misbehaving();
      rec.signature = session->signature();
    } else {
      rec.state = SessionState::Aborted;
      rec.abort_reason = protocol::AbortReason::InsufficientQuorum;
    }
    attempts.push_back(std::move(rec));
  }

  void finish_request(const Outcome& outcome) {
    if (outcome.kind != OutcomeKind::Completes && !final_outcome) final_outcome = outcome;
    if (outcome.kind == OutcomeKind::Completes) {
      latency.push_back(now - request_started);
      fire_phase_faults(Phase::Completed);
    }
    ++timer_generation;  // cancels the pending timer
    if (outcome.kind == OutcomeKind::Completes && request + 1 < config.requests) {
      ++request;
      begin_request();
    } else {
      phase = CoordPhase::Done;
    }
  }

  void abort_with(protocol::AbortReason reason) {
    if (session && !session->terminal()) session->abort(reason, ledger.get());
    record_attempt();
    finish_request({OutcomeKind::AbortsWith, reason, std::nullopt});
  }

  void after_discovery() {
    try {
      session = SigningSession::start(key, suite, message_hash, responsive, attempt_sid);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientQuorum) throw;
      record_attempt();
      finish_request({OutcomeKind::AbortsWith, protocol::AbortReason::InsufficientQuorum, std::nullopt});
      return;
    }
    retransmits = 0;
    enter_phase(CoordPhase::Approval);
    send_approval_request();
    arm_timer();
  }

  void send_approval_request() {
    send(kCoordinator, kUserNode,
         make(kCoordinator, MessageKind::ApprovalRequest, attempt_sid, Bytes(message_hash.begin(), message_hash.end())));
  }

  protocol::NonceRequest nonce_request() const {
    return {attempt_sid, message_hash, suite.suite_id, key.epoch, session->participants()};
  }

  void send_nonce_requests(bool only_missing) {
    Bytes payload = encode_nonce_request(nonce_request());
    for (const auto& h : session->participants()) {
      if (only_missing && session->commitments().contains(h)) continue;
      send(kCoordinator, node_of(h), make(kCoordinator, MessageKind::NonceRequest, attempt_sid, payload));
    }
  }

  void send_partial_requests(bool only_missing) {
    Bytes payload = encode_commitments(session->commitments());
    for (const auto& h : session->participants()) {
      if (only_missing && session->partials().contains(h)) continue;
      send(kCoordinator, node_of(h), make(kCoordinator, MessageKind::PartialRequest, attempt_sid, payload));
    }
  }

  void coordinator_receive(const ProtocolMessage& msg) {
    if (phase == CoordPhase::Done || msg.session_id != attempt_sid) {
      throw Error(ErrorCode::ProtocolViolation, "message for no live session");
    }
    if (msg.sender == kUserNode && msg.kind == MessageKind::Pong) throw Error(ErrorCode::ProtocolViolation, "user pong");
    switch (msg.kind) {
      case MessageKind::Pong:
        if (phase != CoordPhase::Discovery) return;  // late answer
        responsive.insert(msg.sender);
        if (responsive.size() == config.n) after_discovery();
        return;
      case MessageKind::ApprovalResponse: {
        if (msg.sender != kUserNode) throw Error(ErrorCode::ProtocolViolation, "approval from a QTSP");
        if (phase != CoordPhase::Approval) return;
        ByteReader r(msg.payload);
        std::uint8_t d = r.u8();
        r.expect_end();
        auto decision = d == 1 ? protocol::Decision::Approve : protocol::Decision::Deny;
        try {
          session->approve(decision, ledger.get());
        } catch (const Error& e) {
          if (e.code() != ErrorCode::LedgerUnavailable) throw;
          abort_with(protocol::AbortReason::LedgerUnavailable);
          return;
        }
        if (session->terminal()) {
          record_attempt();
          finish_request({OutcomeKind::AbortsWith, session->abort_reason(), std::nullopt});
          return;
        }
        retransmits = 0;
        enter_phase(CoordPhase::NonceCommitment);
        send_nonce_requests(false);
        arm_timer();
        return;
      }
      case MessageKind::NonceCommit: {
        if (phase != CoordPhase::NonceCommitment) return;
        Holder h = holder_of(msg.sender);
        if (!session->is_participant(h)) throw Error(ErrorCode::ProtocolViolation, "not a participant");
        if (session->commitments().contains(h)) return;  // answer to a retransmission
        Element e = suite.group->decode(msg.payload);
        session->contribute_nonce(h, e);
        if (!commitments_seen.insert(e.encoding).second) commitments_unique = false;
        if (session->state() == SessionState::PartialSigning) {
          retransmits = 0;
          enter_phase(CoordPhase::PartialSigning);
          send_partial_requests(false);
          arm_timer();
        }
        return;
      }
      case MessageKind::Partial: {
        if (phase != CoordPhase::PartialSigning) return;
        Holder h = holder_of(msg.sender);
        if (!session->is_participant(h)) throw Error(ErrorCode::ProtocolViolation, "not a participant");
        if (session->partials().contains(h)) return;
        FieldElement z = suite.group->decode_scalar(msg.payload);
        try {
          session->contribute_partial(h, z);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Misbehavior) throw;
          record_attempt();
          finish_request({OutcomeKind::DetectsMisbehavior, protocol::AbortReason::Misbehavior, h});
          return;
        }
        if (session->partials().size() == session->participants().size()) {
          try {
            session->aggregate(*ledger);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::LedgerUnavailable) throw;
            record_attempt();
            finish_request({OutcomeKind::AbortsWith, protocol::AbortReason::LedgerUnavailable, std::nullopt});
            return;
          }
          record_attempt();
          finish_request({OutcomeKind::Completes, protocol::AbortReason::None, std::nullopt});
        }
        return;
      }
      default:
        throw Error(ErrorCode::ProtocolViolation, "unexpected message for the coordinator");
    }
  }

  void on_timer(std::uint64_t generation) {
    if (generation != timer_generation || phase == CoordPhase::Done) return;
    counters.timeouts++;
    if (phase == CoordPhase::Discovery) {
      after_discovery();
      return;
    }
    if (retransmits < kMaxRetransmits) {
      ++retransmits;
      counters.retransmits++;
      if (phase == CoordPhase::Approval) send_approval_request();
      if (phase == CoordPhase::NonceCommitment) send_nonce_requests(true);
      if (phase == CoordPhase::PartialSigning) send_partial_requests(true);
      arm_timer();
      return;
    }
    if (phase == CoordPhase::Approval) {
      abort_with(protocol::AbortReason::UserUnavailable);
      return;
    }
    // A participant went silent after commitment: never substitute, restart.
    session->abort(protocol::AbortReason::ParticipantDropped, ledger.get());
    record_attempt();
    if (attempt < kMaxAttempts) {
      counters.restarts++;
      begin_attempt();
    } else {
      finish_request({OutcomeKind::AbortsWith, protocol::AbortReason::ParticipantDropped, std::nullopt});
    }
  }

  // --- faults ---

  void fire_step_faults() {
    for (auto& [f, fired] : scheduled) {
      if (!fired && f.at_step && *f.at_step == step_count) {
        fired = true;
        apply(f);
      }
    }
  }

  void fire_phase_faults(Phase p) {
    if (!phases_seen.insert(p).second) return;
    for (auto& [f, fired] : scheduled) {
      if (!fired && f.at_phase && *f.at_phase == p) {
        fired = true;
        apply(f);
      }
    }
  }

  void check(NodeId id, bool allow_coordinator) const {
    bool ok = id == kUserNode || (id >= 1 && id <= config.n) || (allow_coordinator && id == kCoordinator);
    if (!ok) throw Error(ErrorCode::Config, "fault references unknown node " + node_name(id), {node_name(id)});
  }

  void apply(const FaultAction& f) {
    auto need = [&](bool allow_coordinator) -> NodeId {
      if (!f.node) throw Error(ErrorCode::Config, std::string(to_string(f.kind)) + " needs a node");
      check(*f.node, allow_coordinator);
      return *f.node;
    };
    if (f.from) check(*f.from, true);
    if (f.to) check(*f.to, true);
    switch (f.kind) {
      case FaultKind::DropNode:
        dead.insert(need(false));
        break;
      case FaultKind::TamperBody:
        tamper_filters.push_back({f.from, f.to, f.message_kind, f.count});
        break;
      case FaultKind::DuplicateMessage:
        duplicate_filters.push_back({f.from, f.to, f.message_kind, f.count});
        break;
      case FaultKind::SpoofSender: {
        NodeId claimed = need(true);
        NodeId target = f.to.value_or(claimed == kCoordinator ? kUserNode : kCoordinator);
        check(target, true);
        // The adversary knows the protocol but not the pairwise key.
        Hash32 wrong_key{};
        rng("adversary").fill(wrong_key);
        MessageKind kind = f.message_kind.value_or(claimed == kCoordinator ? MessageKind::ApprovalRequest
                                                                            : MessageKind::Pong);
        Bytes payload(32);
        rng("adversary").fill(payload);
        for (std::uint32_t i = 0; i < f.count; ++i) {
          Envelope env;
          env.from = claimed;
          env.to = target;
          env.seq = 1'000'000 + i;
          env.body = make(claimed, kind, attempt_sid, payload).encode();
          env.auth_tag = TransportKeys::tag_with(wrong_key, claimed, target, env.seq, env.body);
          transmit(std::move(env));
        }
        break;
      }
      case FaultKind::Flood: {
        NodeId src = need(false);
        NodeId target = f.to.value_or(kCoordinator);
        check(target, true);
        for (std::uint32_t i = 0; i < f.count; ++i) send(src, target, make(src, MessageKind::Junk, SessionId{}));
        break;
      }
      case FaultKind::PartitionSet: {
        std::set<NodeId> side;
        for (auto id : f.nodes) {
          check(id, true);
          side.insert(id);
        }
        partitions.push_back(std::move(side));
        break;
      }
      case FaultKind::ForgeLedgerEntry: {
        SessionId sid{};
        rng("adversary").fill(sid);
        Hash32 msg{};
        rng("adversary").fill(msg);
        Bytes payload(suite.payload_size());
        rng("adversary").fill(payload);
        std::vector<std::uint32_t> who;
        for (std::uint32_t i = 1; i <= config.t; ++i) who.push_back(i);
        ledger->append({ledger::EntryKind::SessionCompleted, sid, msg, suite.suite_id, who,
                        Signature{suite.suite_id, payload}.to_wire()});
        break;
      }
      case FaultKind::CorruptShare: {
        auto& target = node(need(false));
        protocol::KeyShare bad = target.share();
        bad.secret += FieldElement(1, bad.secret.modulus());
        target.install(bad, target.key(), target.suite());
        break;
      }
      case FaultKind::LedgerOutage:
        ledger_failing = true;
        break;
    }
  }

  // --- driving ---

  std::vector<TraceEvent> step() {
    std::vector<TraceEvent> trace;
    if (queue.empty()) return trace;
    fire_step_faults();
    now = queue.next_time();
    ++step_count;
    while (!queue.empty() && queue.next_time() == now) {
      Event ev = queue.pop();
      switch (ev.type) {
        case EventType::Deliver:
          deliver(ev.envelope, trace);
          break;
        case EventType::Process:
          process(ev.node, trace);
          break;
        case EventType::Timer:
          trace.push_back({now, "timer", kCoordinator, kCoordinator, ev.timer});
          on_timer(ev.timer);
          break;
      }
    }
    return trace;
  }

  Transcript transcript() const {
    Transcript t;
    t.scenario = config.name;
    t.seed = config.seed;
    t.expected = config.expected_outcome;
    if (final_outcome) {
      t.outcome = *final_outcome;
    } else if (phase == CoordPhase::Done) {
      t.outcome = {OutcomeKind::Completes, protocol::AbortReason::None, std::nullopt};
    } else {
      t.outcome = {OutcomeKind::AbortsWith, protocol::AbortReason::Timeout, std::nullopt};
    }
    t.counters = counters;
    t.attempts = attempts;
    t.latency_ticks = latency;
    t.group_public_key = key.group_public_key.encoding;
    t.suite_id = key.suite_id;
    t.ledger = ledger->entries();
    t.chain_ok = ledger::verify_chain(t.ledger).ok;
    t.audit = ledger::user_audit(t.ledger, user->approvals());
    // The toy group has ten non-identity elements, so repeats there are expected.
    if (suite.group->order() > 1'000'000) t.nonce_commitments_unique = commitments_unique;
    t.tap_messages = tap.size();
    t.tap_bytes = tap_bytes;
    t.steps = step_count;
    t.final_time = now;

    if (t.outcome != t.expected) {
      t.mismatches.push_back("outcome " + t.outcome.describe() + " != expected " + t.expected.describe());
    }
    if (t.audit.size() != config.expected_audit_discrepancies) {
      t.mismatches.push_back("audit discrepancies " + std::to_string(t.audit.size()) + " != expected " +
                             std::to_string(config.expected_audit_discrepancies));
    }
    auto counts = counters.as_map();
    for (const auto& [name, min] : config.expected_min_counters) {
      if (counts.at(name) < min) {
        t.mismatches.push_back("counter " + name + " = " + std::to_string(counts.at(name)) + " < " + std::to_string(min));
      }
    }
    if (!t.chain_ok) t.mismatches.push_back("ledger chain broken");
    if (t.nonce_commitments_unique == false) t.mismatches.push_back("nonce commitment repeated");
    t.matched = t.mismatches.empty();
    return t;
  }
};

Simulation::Simulation(ScenarioConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Simulation::~Simulation() = default;

std::vector<TraceEvent> Simulation::step() { return impl_->step(); }
void Simulation::inject(const FaultAction& action) { impl_->apply(action); }
bool Simulation::finished() const { return impl_->queue.empty(); }

Transcript Simulation::run() {
  while (!finished() && impl_->step_count < kMaxSteps) step();
  return transcript();
}

Transcript Simulation::transcript() const { return impl_->transcript(); }
const ScenarioConfig& Simulation::config() const { return impl_->config; }
std::uint64_t Simulation::now() const { return impl_->now; }
std::uint64_t Simulation::steps() const { return impl_->step_count; }
const protocol::DistributedKey& Simulation::key() const { return impl_->key; }
protocol::SignerNode& Simulation::signer(NodeId id) { return impl_->node(id); }
ledger::SigningLedger& Simulation::ledger() { return *impl_->ledger; }
const std::vector<Bytes>& Simulation::tap() const { return impl_->tap; }

Transcript run_scenario(const ScenarioConfig& config) { return Simulation(config).run(); }

// --- Transcript export -----------------------------------------------------

std::string Transcript::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["outcome"] = outcome.describe();
  j["expected_outcome"] = expected.describe();
  j["matched"] = matched;
  j["mismatches"] = mismatches;
  ordered_json c = ordered_json::object();
  for (const auto& [k, v] : counters.as_map()) c[k] = v;
  j["counters"] = c;
  auto arr = ordered_json::array();
  for (const auto& a : attempts) {
    ordered_json r;
    r["request"] = a.request;
    r["session_id"] = to_hex(a.session_id);
    auto parts = ordered_json::array();
    for (const auto& h : a.participants) parts.push_back(h.name());
    r["participants"] = parts;
    r["state"] = protocol::to_string(a.state);
    r["abort_reason"] = protocol::to_string(a.abort_reason);
    r["misbehaving"] = a.misbehaving ? ordered_json(a.misbehaving->name()) : ordered_json(nullptr);
    r["signature"] = a.signature ? ordered_json(to_hex(a.signature->payload)) : ordered_json(nullptr);
    r["started_at"] = a.started_at;
    r["finished_at"] = a.finished_at;
    arr.push_back(r);
  }
  j["sessions"] = arr;
  j["latency_ticks"] = latency_ticks;
  j["suite_id"] = suite_id;
  j["group_public_key"] = to_hex(group_public_key);
  ordered_json l;
  l["entries"] = ledger.size();
  l["head_hash"] = ledger.empty() ? to_hex(Hash32{}) : to_hex(ledger.back().entry_hash);
  l["digest"] = to_hex(ledger::ledger_digest(ledger));
  l["chain_ok"] = chain_ok;
  auto kinds = ordered_json::array();
  for (const auto& e : ledger) kinds.push_back(ledger::to_string(e.kind));
  l["kinds"] = kinds;
  j["ledger"] = l;
  auto audit_arr = ordered_json::array();
  for (const auto& d : audit) {
    ordered_json r;
    r["index"] = d.index;
    r["session_id"] = to_hex(d.session_id);
    r["reason"] = d.reason;
    audit_arr.push_back(r);
  }
  j["audit"] = audit_arr;
  j["nonce_commitments_unique"] =
      nonce_commitments_unique ? ordered_json(*nonce_commitments_unique) : ordered_json(nullptr);
  j["tap"] = {{"messages", tap_messages}, {"bytes", tap_bytes}};
  j["steps"] = steps;
  j["final_time"] = final_time;
  return j.dump(2) + "\n";
}

Hash32 Transcript::digest() const { return crypto::sha256(as_bytes(to_json())); }

}  // namespace qoesign::sim
