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

#include "qoesign/sim/scenario.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qoesign/errors.hpp"
#include "qoesign/suite/suite.hpp"

namespace qoesign::sim {

namespace detail {
struct EmbeddedScenario {
  std::string_view file;
  std::string_view json;
};
extern const std::vector<EmbeddedScenario> kEmbeddedScenarios;
}  // namespace detail

namespace {

using nlohmann::ordered_json;

constexpr std::array<std::pair<Phase, std::string_view>, 5> kPhaseNames = {{
    {Phase::Discovery, "discovery"},
    {Phase::Approval, "approval"},
    {Phase::NonceCommitment, "nonce_commitment"},
    {Phase::PartialSigning, "partial_signing"},
    {Phase::Completed, "completed"},
}};

constexpr std::array<std::pair<FaultKind, std::string_view>, 9> kFaultNames = {{
    {FaultKind::DropNode, "drop_node"},
    {FaultKind::TamperBody, "tamper_body"},
    {FaultKind::SpoofSender, "spoof_sender"},
    {FaultKind::DuplicateMessage, "duplicate_message"},
    {FaultKind::Flood, "flood"},
    {FaultKind::PartitionSet, "partition_set"},
    {FaultKind::ForgeLedgerEntry, "forge_ledger_entry"},
    {FaultKind::CorruptShare, "corrupt_share"},
    {FaultKind::LedgerOutage, "ledger_outage"},
}};

const std::vector<std::string> kCounterNames = {"sent",        "delivered", "dropped",  "rejected_auth",  "rejected_replay",
                                                "rejected_protocol", "retransmits", "timeouts", "restarts", "max_inbox_depth"};

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::Config, field + ": " + msg, {field});
}

void only_keys(const ordered_json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) config_error(where + "." + k, "unknown field");
  }
}

template <typename T>
T get_field(const ordered_json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(where + "." + key, e.what());
  }
}

bool valid_node(NodeId id, std::uint32_t n) { return id == kUserNode || id == kCoordinator || id <= n; }

void check_node(NodeId id, std::uint32_t n, const std::string& field, bool allow_coordinator) {
  if (!valid_node(id, n) || (!allow_coordinator && id == kCoordinator)) {
    config_error(field, "node " + node_name(id) + " is not part of this run");
  }
}

FaultAction parse_fault(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected an object");
  only_keys(j, where, {"action", "at_step", "at_phase", "node", "from", "to", "message_kind", "count", "nodes"});
  FaultAction f;
  f.kind = parse_fault_kind(get_field<std::string>(j, "action", where));
  if (j.contains("at_step")) f.at_step = get_field<std::uint64_t>(j, "at_step", where);
  if (j.contains("at_phase")) f.at_phase = parse_phase(get_field<std::string>(j, "at_phase", where));
  if (j.contains("node")) f.node = parse_node(get_field<std::string>(j, "node", where));
  if (j.contains("from")) f.from = parse_node(get_field<std::string>(j, "from", where));
  if (j.contains("to")) f.to = parse_node(get_field<std::string>(j, "to", where));
  if (j.contains("message_kind")) f.message_kind = parse_message_kind(get_field<std::string>(j, "message_kind", where));
  if (j.contains("count")) f.count = get_field<std::uint32_t>(j, "count", where);
  if (j.contains("nodes")) {
    for (const auto& n : get_field<std::vector<std::string>>(j, "nodes", where)) f.nodes.push_back(parse_node(n));
  }
  return f;
}

ordered_json fault_to_json(const FaultAction& f) {
  ordered_json j;
  j["action"] = to_string(f.kind);
  if (f.at_step) j["at_step"] = *f.at_step;
  if (f.at_phase) j["at_phase"] = to_string(*f.at_phase);
  if (f.node) j["node"] = node_name(*f.node);
  if (f.from) j["from"] = node_name(*f.from);
  if (f.to) j["to"] = node_name(*f.to);
  if (f.message_kind) j["message_kind"] = to_string(*f.message_kind);
  if (f.count != 1) j["count"] = f.count;
  if (!f.nodes.empty()) {
    auto arr = ordered_json::array();
    for (auto n : f.nodes) arr.push_back(node_name(n));
    j["nodes"] = arr;
  }
  return j;
}

Outcome parse_outcome(const ordered_json& j) {
  const std::string where = "expected_outcome";
  if (!j.is_object()) config_error(where, "expected an object");
  only_keys(j, where, {"kind", "reason", "holder"});
  Outcome o;
  auto kind = get_field<std::string>(j, "kind", where);
  if (kind == "completes") {
    o.kind = OutcomeKind::Completes;
  } else if (kind == "aborts_with") {
    o.kind = OutcomeKind::AbortsWith;
    try {
      o.reason = protocol::parse_abort_reason(get_field<std::string>(j, "reason", where));
    } catch (const Error& e) {
      config_error(where + ".reason", e.what());
    }
  } else if (kind == "detects_misbehavior") {
    o.kind = OutcomeKind::DetectsMisbehavior;
    o.holder = holder_of(parse_node(get_field<std::string>(j, "holder", where)));
  } else {
    config_error(where + ".kind", "unknown outcome '" + kind + "'");
  }
  return o;
}

ordered_json outcome_to_json(const Outcome& o) {
  ordered_json j;
  j["kind"] = to_string(o.kind);
  if (o.kind == OutcomeKind::AbortsWith) j["reason"] = to_string(o.reason);
  if (o.holder) j["holder"] = o.holder->name();
  return j;
}

}  // namespace

std::string_view to_string(Phase p) {
  for (const auto& [v, name] : kPhaseNames) {
    if (v == p) return name;
  }
  return "unknown";
}

Phase parse_phase(std::string_view s) {
  for (const auto& [v, name] : kPhaseNames) {
    if (name == s) return v;
  }
  throw Error(ErrorCode::Config, "unknown phase '" + std::string(s) + "'");
}

std::string_view to_string(FaultKind k) {
  for (const auto& [v, name] : kFaultNames) {
    if (v == k) return name;
  }
  return "unknown";
}

FaultKind parse_fault_kind(std::string_view s) {
  for (const auto& [v, name] : kFaultNames) {
    if (name == s) return v;
  }
  throw Error(ErrorCode::Config, "unknown fault action '" + std::string(s) + "'");
}

std::string_view to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Completes: return "completes";
    case OutcomeKind::AbortsWith: return "aborts_with";
    case OutcomeKind::DetectsMisbehavior: return "detects_misbehavior";
  }
  return "unknown";
}

std::string Outcome::describe() const {
  switch (kind) {
    case OutcomeKind::Completes: return "completes";
    case OutcomeKind::AbortsWith: return "aborts_with(" + std::string(to_string(reason)) + ")";
    case OutcomeKind::DetectsMisbehavior:
      return "detects_misbehavior(" + (holder ? holder->name() : std::string("?")) + ")";
  }
  return "unknown";
}

bool Outcome::operator==(const Outcome& other) const {
  if (kind != other.kind) return false;
  if (kind == OutcomeKind::AbortsWith) return reason == other.reason;
  if (kind == OutcomeKind::DetectsMisbehavior) return holder == other.holder;
  return true;
}

void ScenarioConfig::validate() const {
  if (name.empty() || !std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
      })) {
    config_error("name", "must be non-empty lowercase letters, digits and '-'");
  }
  if (n < 1 || n > 16) config_error("n", "must be in 1..16");
  if (t < 1 || t > n) config_error("t", "must satisfy 1 <= t <= n");
  if (requests < 1 || requests > 100) config_error("requests", "must be in 1..100");
  SignatureSuite suite;
  try {
    suite = make_default_registry().resolve(suite_id);
  } catch (const Error& e) {
    config_error("suite_id", e.what());
  }
  if (!suite.threshold_capable) config_error("suite_id", "suite is not threshold-capable");

  for (std::size_t i = 0; i < faults.size(); ++i) {
    const auto& f = faults[i];
    const std::string where = "faults[" + std::to_string(i) + "]";
    if (f.at_step.has_value() == f.at_phase.has_value()) config_error(where, "exactly one of at_step and at_phase");
    auto need_node = [&](bool allow_coordinator) {
      if (!f.node) config_error(where + ".node", "required for " + std::string(to_string(f.kind)));
      check_node(*f.node, n, where + ".node", allow_coordinator);
    };
    switch (f.kind) {
      case FaultKind::DropNode:
      case FaultKind::CorruptShare:
        need_node(false);
        break;
      case FaultKind::SpoofSender:
        need_node(true);
        break;
      case FaultKind::Flood:
        need_node(false);
        if (f.count > 100000) config_error(where + ".count", "flood count must be at most 100000");
        break;
      case FaultKind::PartitionSet:
        if (f.nodes.empty()) config_error(where + ".nodes", "partition needs at least one node");
        for (auto id : f.nodes) check_node(id, n, where + ".nodes", true);
        break;
      case FaultKind::TamperBody:
      case FaultKind::DuplicateMessage:
      case FaultKind::ForgeLedgerEntry:
      case FaultKind::LedgerOutage:
        break;
    }
    if (f.from) check_node(*f.from, n, where + ".from", true);
    if (f.to) check_node(*f.to, n, where + ".to", true);
    if (f.count == 0) config_error(where + ".count", "must be positive");
  }
  if (expected_outcome.kind == OutcomeKind::DetectsMisbehavior) {
    if (!expected_outcome.holder) config_error("expected_outcome.holder", "required");
    check_node(node_of(*expected_outcome.holder), n, "expected_outcome.holder", false);
  }
  if (expected_outcome.kind == OutcomeKind::AbortsWith && expected_outcome.reason == protocol::AbortReason::None) {
    config_error("expected_outcome.reason", "required");
  }
  for (const auto& [k, _] : expected_min_counters) {
    if (std::find(kCounterNames.begin(), kCounterNames.end(), k) == kCounterNames.end()) {
      config_error("expected_min_counters." + k, "unknown counter");
    }
  }
}

ScenarioConfig parse_scenario(std::string_view json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("scenario is not valid JSON: ") + e.what());
  }
  const std::string where = "scenario";
  if (!j.is_object()) config_error(where, "expected an object");
  only_keys(j, where,
            {"name", "description", "threat_rows", "n", "t", "suite_id", "seed", "requests", "user_decision",
             "transport_auth", "faults", "expected_outcome", "expected_audit_discrepancies", "expected_min_counters"});
  ScenarioConfig c;
  c.name = get_field<std::string>(j, "name", where);
  if (j.contains("description")) c.description = get_field<std::string>(j, "description", where);
  if (j.contains("threat_rows")) c.threat_rows = get_field<std::vector<std::string>>(j, "threat_rows", where);
  c.n = get_field<std::uint32_t>(j, "n", where);
  c.t = get_field<std::uint32_t>(j, "t", where);
  if (j.contains("suite_id")) c.suite_id = get_field<std::string>(j, "suite_id", where);
  c.seed = get_field<std::uint64_t>(j, "seed", where);
  if (j.contains("requests")) c.requests = get_field<std::uint32_t>(j, "requests", where);
  if (j.contains("user_decision")) {
    try {
      c.user_decision = protocol::parse_decision(get_field<std::string>(j, "user_decision", where));
    } catch (const Error& e) {
      config_error("scenario.user_decision", e.what());
    }
  }
  if (j.contains("transport_auth")) c.transport_auth = get_field<bool>(j, "transport_auth", where);
  if (j.contains("faults")) {
    const auto& arr = j.at("faults");
    if (!arr.is_array()) config_error("faults", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) c.faults.push_back(parse_fault(arr[i], "faults[" + std::to_string(i) + "]"));
  }
  c.expected_outcome = parse_outcome(j.at("expected_outcome"));
  if (j.contains("expected_audit_discrepancies")) {
    c.expected_audit_discrepancies = get_field<std::uint32_t>(j, "expected_audit_discrepancies", where);
  }
  if (j.contains("expected_min_counters")) {
    c.expected_min_counters =
        get_field<std::map<std::string, std::uint64_t>>(j, "expected_min_counters", where);
  }
  c.validate();
  return c;
}

std::string serialize_scenario(const ScenarioConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["threat_rows"] = c.threat_rows;
  j["n"] = c.n;
  j["t"] = c.t;
  j["suite_id"] = c.suite_id;
  j["seed"] = c.seed;
  j["requests"] = c.requests;
  j["user_decision"] = to_string(c.user_decision);
  j["transport_auth"] = c.transport_auth;
  auto faults = ordered_json::array();
  for (const auto& f : c.faults) faults.push_back(fault_to_json(f));
  j["faults"] = faults;
  j["expected_outcome"] = outcome_to_json(c.expected_outcome);
  j["expected_audit_discrepancies"] = c.expected_audit_discrepancies;
  ordered_json counters = ordered_json::object();
  for (const auto& [k, v] : c.expected_min_counters) counters[k] = v;
  j["expected_min_counters"] = counters;
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read scenario file '" + path + "'", {path});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

const std::vector<ScenarioConfig>& bundled_scenarios() {
  static const std::vector<ScenarioConfig> corpus = [] {
    std::vector<ScenarioConfig> out;
    for (const auto& e : detail::kEmbeddedScenarios) {
      try {
        out.push_back(parse_scenario(e.json));
      } catch (const Error& err) {
        throw Error(ErrorCode::Config, "bundled scenario " + std::string(e.file) + ": " + err.what());
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
  }();
  return corpus;
}

ScenarioConfig resolve_scenario(const std::string& name_or_path) {
  for (const auto& s : bundled_scenarios()) {
    if (s.name == name_or_path) return s;
  }
  if (name_or_path.find('/') != std::string::npos || name_or_path.ends_with(".json")) {
    return load_scenario_file(name_or_path);
  }
  throw Error(ErrorCode::NotFound, "no bundled scenario named '" + name_or_path + "'", {name_or_path});
}

}  // namespace qoesign::sim
