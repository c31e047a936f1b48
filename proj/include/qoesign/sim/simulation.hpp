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

#include <memory>
#include <queue>
#include <set>

#include "qoesign/sim/scenario.hpp"

namespace qoesign::sim {

// Link latency and coordinator timing, in simulated ticks.
inline constexpr std::uint64_t kPhaseTimeout = 16;
inline constexpr std::uint32_t kMaxRetransmits = 2;
inline constexpr std::uint32_t kMaxAttempts = 3;
inline constexpr std::uint64_t kMaxSteps = 1'000'000;

enum class EventType { Deliver, Process, Timer };

struct Event {
  std::uint64_t time = 0;
  EventType type = EventType::Deliver;
  Envelope envelope;        // Deliver
  NodeId node = 0;          // Process: the node; Timer: the coordinator
  std::uint64_t timer = 0;  // Timer generation
};

// Orders events by (time, type, seq, from, to, insertion).
class EventQueue {
 public:
  void push(Event ev);
  bool empty() const { return heap_.empty(); }
  std::uint64_t next_time() const;
  Event pop();
  std::size_t size() const { return heap_.size(); }

 private:
  struct Keyed {
    Event ev;
    std::uint64_t insertion;
  };
  struct Later {
    bool operator()(const Keyed& a, const Keyed& b) const;
  };
  std::priority_queue<Keyed, std::vector<Keyed>, Later> heap_;
  std::uint64_t counter_ = 0;
};

// What a step did, one record per handled event.
struct TraceEvent {
  std::uint64_t time = 0;
  std::string what;  // deliver, drop, reject-auth, reject-replay, process, timer
  NodeId from = 0;
  NodeId to = 0;
  std::uint64_t seq = 0;
};

struct Counters {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t rejected_auth = 0;
  std::uint64_t rejected_replay = 0;
  std::uint64_t rejected_protocol = 0;
  std::uint64_t retransmits = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t restarts = 0;
  std::uint64_t max_inbox_depth = 0;

  std::map<std::string, std::uint64_t> as_map() const;
};

struct AttemptRecord {
  std::uint32_t request = 0;
  SessionId session_id{};
  std::vector<protocol::Holder> participants;
  protocol::SessionState state = protocol::SessionState::Requested;
  protocol::AbortReason abort_reason = protocol::AbortReason::None;
  std::optional<protocol::Holder> misbehaving;
  std::optional<Signature> signature;
  std::uint64_t started_at = 0;
  std::uint64_t finished_at = 0;
};

struct Transcript {
  std::string scenario;
  std::uint64_t seed = 0;
  Outcome outcome;
  Outcome expected;
  bool matched = false;
  std::vector<std::string> mismatches;  // which expectation failed
  Counters counters;
  std::vector<AttemptRecord> attempts;
  std::vector<std::uint64_t> latency_ticks;  // per completed request
  Bytes group_public_key;
  std::string suite_id;
  std::vector<ledger::LedgerEntry> ledger;
  bool chain_ok = false;
  std::vector<ledger::AuditDiscrepancy> audit;
  std::optional<bool> nonce_commitments_unique;  // production groups only
  std::uint64_t tap_messages = 0;
  std::uint64_t tap_bytes = 0;
  std::uint64_t steps = 0;
  std::uint64_t final_time = 0;

  // Stable field order; identical runs give identical bytes.
  std::string to_json() const;
  Hash32 digest() const;
};

class Simulation {
 public:
  explicit Simulation(ScenarioConfig config);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Advances the clock to the next pending timestamp and handles every event
  // due then, in queue order. Returns nothing once the network is idle.
  std::vector<TraceEvent> step();
  // Applies a fault now. Throws Config for nodes outside the run.
  void inject(const FaultAction& action);
  bool finished() const;
  Transcript run();
  Transcript transcript() const;

  const ScenarioConfig& config() const;
  std::uint64_t now() const;
  std::uint64_t steps() const;
  const protocol::DistributedKey& key() const;
  protocol::SignerNode& signer(NodeId id);
  ledger::SigningLedger& ledger();
  // Plaintext bodies seen by the information-disclosure tap.
  const std::vector<Bytes>& tap() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Transcript run_scenario(const ScenarioConfig& config);

}  // namespace qoesign::sim
