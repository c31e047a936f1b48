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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qoesign/protocol/session.hpp"
#include "qoesign/sim/message.hpp"

namespace qoesign::sim {

// Coordinator phases a fault may be keyed to. A phase trigger fires the
// first time any request of the run enters that phase.
enum class Phase { Discovery, Approval, NonceCommitment, PartialSigning, Completed };
std::string_view to_string(Phase p);
Phase parse_phase(std::string_view s);

enum class FaultKind {
  DropNode,          // node goes silent for the rest of the run
  TamperBody,        // flips the last body byte of matching envelopes after sealing
  SpoofSender,       // injects an envelope claiming `node` as sender, tagged under a wrong key
  DuplicateMessage,  // delivers matching envelopes twice
  Flood,             // `node` sends `count` junk envelopes to `to` (default coordinator)
  PartitionSet,      // cuts every link with exactly one endpoint in `nodes`
  ForgeLedgerEntry,  // coordinator appends a SessionCompleted the user never approved
  CorruptShare,      // adds one to `node`'s stored share
  LedgerOutage,      // ledger store fails from now on
};
std::string_view to_string(FaultKind k);
FaultKind parse_fault_kind(std::string_view s);

struct FaultAction {
  FaultKind kind = FaultKind::DropNode;
  std::optional<std::uint64_t> at_step;  // exactly one of at_step / at_phase
  std::optional<Phase> at_phase;
  std::optional<NodeId> node;
  std::optional<NodeId> from;  // link filter for TamperBody / DuplicateMessage
  std::optional<NodeId> to;
  std::optional<MessageKind> message_kind;
  std::uint32_t count = 1;
  std::vector<NodeId> nodes;
};

enum class OutcomeKind { Completes, AbortsWith, DetectsMisbehavior };
std::string_view to_string(OutcomeKind k);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Completes;
  protocol::AbortReason reason = protocol::AbortReason::None;  // AbortsWith
  std::optional<protocol::Holder> holder;                       // DetectsMisbehavior

  std::string describe() const;  // "completes", "aborts_with(user_denied)", "detects_misbehavior(qtsp-3)"
  // Compares only the fields meaningful for the kind.
  bool operator==(const Outcome& other) const;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  std::vector<std::string> threat_rows;  // "<component>/<stride letter>" rows the scenario exercises
  std::uint32_t n = 3;
  std::uint32_t t = 2;
  std::string suite_id = "schnorr-prod-v1";
  std::uint64_t seed = 1;
  std::uint32_t requests = 1;
  protocol::Decision user_decision = protocol::Decision::Approve;
  bool transport_auth = true;
  std::vector<FaultAction> faults;
  Outcome expected_outcome;
  std::uint32_t expected_audit_discrepancies = 0;
  std::map<std::string, std::uint64_t> expected_min_counters;

  // Throws Config naming the offending field.
  void validate() const;
};

ScenarioConfig parse_scenario(std::string_view json_text);
std::string serialize_scenario(const ScenarioConfig& config);
ScenarioConfig load_scenario_file(const std::string& path);

// The corpus compiled into the library, sorted by name.
const std::vector<ScenarioConfig>& bundled_scenarios();
// Bundled name, or else a path to a scenario file.
ScenarioConfig resolve_scenario(const std::string& name_or_path);

}  // namespace qoesign::sim
