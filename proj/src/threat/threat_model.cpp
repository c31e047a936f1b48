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

#include "qoesign/threat/threat_model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace qoesign::threat {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string ref_name(const ThreatRef& r) { return r.component_id + " " + stride_letter(r.stride); }

int stride_rank(Stride s) { return static_cast<int>(s); }

int requirement_rank(Requirement r) { return static_cast<int>(r); }  // MustConsider most urgent

bool is_flow(ComponentKind k) { return k == ComponentKind::DataFlow || k == ComponentKind::InfoFlow; }

void check_scale(int value, const char* field) {
  if (value < 1 || value > 4) {
    throw Error(ErrorCode::Validation, std::string(field) + " must be in 1..4, got " + std::to_string(value), {field});
  }
}

}  // namespace

std::string_view to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::ExternalEntity: return "external_entity";
    case ComponentKind::Process: return "process";
    case ComponentKind::DataStore: return "data_store";
    case ComponentKind::DataFlow: return "data_flow";
    case ComponentKind::InfoFlow: return "info_flow";
  }
  return "?";
}

std::string_view to_string(Stride s) {
  switch (s) {
    case Stride::S: return "spoofing";
    case Stride::T: return "tampering";
    case Stride::R: return "repudiation";
    case Stride::I: return "information_disclosure";
    case Stride::D: return "denial_of_service";
    case Stride::E: return "elevation_of_privilege";
  }
  return "?";
}

std::string_view to_string(Mitigation m) {
  switch (m) {
    case Mitigation::GoodEnough: return "good_enough";
    case Mitigation::NeedsImprovement: return "needs_improvement";
    case Mitigation::OutOfScope: return "out_of_scope";
  }
  return "?";
}

std::string_view to_string(Priority p) {
  switch (p) {
    case Priority::High: return "high";
    case Priority::Medium: return "medium";
    case Priority::Low: return "low";
  }
  return "?";
}

std::string_view to_string(Requirement r) {
  switch (r) {
    case Requirement::MustConsider: return "must_consider";
    case Requirement::BeAware: return "be_aware";
    case Requirement::Backlog: return "backlog";
  }
  return "?";
}

std::string_view to_string(RuleMode m) { return m == RuleMode::Stated ? "stated" : "table"; }

char stride_letter(Stride s) { return "STRIDE"[stride_rank(s)]; }

std::string_view display_name(Mitigation m) {
  switch (m) {
    case Mitigation::GoodEnough: return "GoodEnough";
    case Mitigation::NeedsImprovement: return "NeedsImprovement";
    case Mitigation::OutOfScope: return "OutOfScope";
  }
  return "?";
}

std::string_view display_name(Priority p) {
  switch (p) {
    case Priority::High: return "High";
    case Priority::Medium: return "Medium";
    case Priority::Low: return "Low";
  }
  return "?";
}

std::string_view display_name(Requirement r) {
  switch (r) {
    case Requirement::MustConsider: return "MustConsider";
    case Requirement::BeAware: return "BeAware";
    case Requirement::Backlog: return "Backlog";
  }
  return "?";
}

ComponentKind parse_component_kind(std::string_view s) {
  for (auto k : {ComponentKind::ExternalEntity, ComponentKind::Process, ComponentKind::DataStore,
                 ComponentKind::DataFlow, ComponentKind::InfoFlow}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::Validation, "unknown component kind: " + std::string(s), {"kind"});
}

Stride parse_stride(std::string_view s) {
  std::string l = lower(s);
  for (auto st : kStrideOrder) {
    if (to_string(st) == l || (l.size() == 1 && std::toupper(static_cast<unsigned char>(l[0])) == stride_letter(st))) {
      return st;
    }
  }
  throw Error(ErrorCode::Validation, "unknown stride category: " + std::string(s), {"stride"});
}

Mitigation parse_mitigation(std::string_view s) {
  for (auto m : {Mitigation::GoodEnough, Mitigation::NeedsImprovement, Mitigation::OutOfScope}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorCode::Validation, "unknown mitigation state: " + std::string(s), {"mitigation"});
}

RuleMode parse_rule_mode(std::string_view s) {
  std::string l = lower(s);
  if (l == "table") return RuleMode::Table;
  if (l == "stated") return RuleMode::Stated;
  throw Error(ErrorCode::Validation, "unknown rule mode: " + std::string(s), {"rule"});
}

MatrixFormat parse_matrix_format(std::string_view s) {
  std::string l = lower(s);
  if (l == "csv") return MatrixFormat::Csv;
  if (l == "markdown" || l == "md") return MatrixFormat::Markdown;
  throw Error(ErrorCode::Validation, "unknown matrix format: " + std::string(s), {"format"});
}

const DfdComponent* DfdModel::find(std::string_view id) const {
  for (const auto& c : components) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

void DfdModel::validate() const {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const auto& c : components) {
    if (c.id.empty()) problems.push_back("component with empty id");
    if (!seen.insert(c.id).second) problems.push_back("duplicate component id " + c.id);
  }
  for (const auto& c : components) {
    if (is_flow(c.kind) != c.endpoints.has_value()) {
      problems.push_back(c.id + ": endpoints must be present exactly for flows");
      continue;
    }
    if (!c.endpoints) continue;
    for (const auto& end : {c.endpoints->first, c.endpoints->second}) {
      const DfdComponent* target = find(end);
      if (!target) {
        problems.push_back(c.id + ": endpoint " + end + " does not exist");
      } else if (is_flow(target->kind)) {
        problems.push_back(c.id + ": endpoint " + end + " is itself a flow");
      }
    }
  }
  for (const auto& b : trust_boundaries) {
    for (const auto& m : b.members) {
      if (!find(m)) problems.push_back("trust boundary " + b.id + ": member " + m + " does not exist");
    }
  }
  if (!problems.empty()) throw Error(ErrorCode::Validation, "invalid DFD model", problems);
}

int priority_score(int impact, int likelihood) {
  check_scale(impact, "impact");
  check_scale(likelihood, "likelihood");
  return impact * likelihood;
}

Priority priority_group(int impact, int likelihood) {
  int score = priority_score(impact, likelihood);
  if (score >= 11 || impact == 4 || likelihood == 4) return Priority::High;
  if (score >= 6) return Priority::Medium;
  return Priority::Low;
}

Requirement requirement_group(Priority priority, Mitigation mitigation, RuleMode mode) {
  bool needs = mitigation == Mitigation::NeedsImprovement;
  if (priority == Priority::High && needs) return Requirement::MustConsider;
  if (mode == RuleMode::Stated) return priority == Priority::Medium && needs ? Requirement::BeAware : Requirement::Backlog;
  if (priority == Priority::High || needs) return Requirement::BeAware;
  return Requirement::Backlog;
}

namespace {

struct RefLess {
  bool operator()(const ThreatRef& a, const ThreatRef& b) const {
    if (a.component_id != b.component_id) return a.component_id < b.component_id;
    return stride_rank(a.stride) < stride_rank(b.stride);
  }
};

using EntryIndex = std::map<ThreatRef, const ThreatEntry*, RefLess>;

void check_entry_shape(const ThreatEntry& e, std::vector<std::string>& problems) {
  std::string name = ref_name(e.ref());
  bool any = e.impact || e.likelihood || e.mitigation;
  bool all = e.impact && e.likelihood && e.mitigation;
  if (e.same_as.empty()) {
    if (!all) problems.push_back(name + ": impact, likelihood and mitigation are required");
    if (e.impact && (*e.impact < 1 || *e.impact > 4)) problems.push_back(name + ": impact outside 1..4");
    if (e.likelihood && (*e.likelihood < 1 || *e.likelihood > 4)) problems.push_back(name + ": likelihood outside 1..4");
  } else if (any) {
    problems.push_back(name + ": same_as rows carry no impact, likelihood or mitigation");
  }
}

// Depth of the longest same_as chain below `ref`; -1 if a cycle is reachable.
int chain_depth(const ThreatRef& ref, const EntryIndex& index, std::set<ThreatRef, RefLess>& stack) {
  const ThreatEntry* e = index.at(ref);
  if (e->same_as.empty()) return 0;
  if (!stack.insert(ref).second) return -1;
  int depth = 0;
  for (const auto& target : e->same_as) {
    int d = chain_depth(target, index, stack);
    if (d < 0) {
      stack.erase(ref);
      return -1;
    }
    depth = std::max(depth, d + 1);
  }
  stack.erase(ref);
  return depth;
}

struct Assessed {
  int impact;
  int likelihood;
  Mitigation mitigation;
  std::string note;
  ThreatRef origin;
};

Assessed resolve(const ThreatEntry& e, const EntryIndex& index, RuleMode mode) {
  if (e.same_as.empty()) return {*e.impact, *e.likelihood, *e.mitigation, e.mitigation_note, e.ref()};
  std::optional<Assessed> best;
  for (const auto& target : e.same_as) {
    Assessed a = resolve(*index.at(target), index, mode);
    if (!best) {
      best = a;
      continue;
    }
    auto rank = [mode](const Assessed& x) {
      return std::pair(requirement_rank(requirement_group(priority_group(x.impact, x.likelihood), x.mitigation, mode)),
                       -x.impact * x.likelihood);
    };
    if (rank(a) < rank(*best)) best = a;
  }
  return *best;
}

}  // namespace

std::vector<ScoredThreat> score_model(const DfdModel& model, const std::vector<ThreatEntry>& entries, RuleMode mode) {
  model.validate();

  std::vector<std::string> shape;
  EntryIndex index;
  for (const auto& e : entries) {
    check_entry_shape(e, shape);
    if (!index.emplace(e.ref(), &e).second) shape.push_back(ref_name(e.ref()) + ": duplicate entry");
  }
  if (!shape.empty()) throw Error(ErrorCode::Validation, "invalid threat entries", shape);

  std::vector<std::string> dangling;
  for (const auto& e : entries) {
    if (!model.find(e.component_id)) dangling.push_back(ref_name(e.ref()) + " -> component " + e.component_id);
    for (const auto& target : e.same_as) {
      if (!index.count(target)) dangling.push_back(ref_name(e.ref()) + " -> same_as " + ref_name(target));
    }
  }
  if (!dangling.empty()) throw Error(ErrorCode::DanglingReference, "unresolved threat references", dangling);

  std::vector<std::string> cyclic;
  std::vector<std::string> too_deep;
  for (const auto& e : entries) {
    std::set<ThreatRef, RefLess> stack;
    int depth = chain_depth(e.ref(), index, stack);
    if (depth < 0) cyclic.push_back(ref_name(e.ref()));
    else if (depth > kMaxSameAsHops) too_deep.push_back(ref_name(e.ref()));
  }
  if (!cyclic.empty()) throw Error(ErrorCode::ReferenceCycle, "same_as cycle", cyclic);
  if (!too_deep.empty()) {
    throw Error(ErrorCode::Validation, "same_as chain longer than " + std::to_string(kMaxSameAsHops) + " hops", too_deep);
  }

  std::vector<ScoredThreat> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    Assessed a = resolve(e, index, mode);
    ScoredThreat s;
    s.entry = e;
    s.impact = a.impact;
    s.likelihood = a.likelihood;
    s.mitigation = a.mitigation;
    s.mitigation_note = a.note;
    s.score = priority_score(a.impact, a.likelihood);
    s.priority = priority_group(a.impact, a.likelihood);
    s.requirement = requirement_group(s.priority, a.mitigation, mode);
    s.rule_mode = mode;
    if (!e.same_as.empty()) s.resolved_from = a.origin;
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredThreat& a, const ScoredThreat& b) { return RefLess{}(a.entry.ref(), b.entry.ref()); });
  return out;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out;
}

}  // namespace

std::string render_matrix(const std::vector<ScoredThreat>& scored, MatrixFormat format) {
  std::ostringstream os;
  if (format == MatrixFormat::Csv) {
    os << "component,stride,description,impact,likelihood,score,priority,mitigation,requirement\n";
    for (const auto& s : scored) {
      os << csv_field(s.entry.component_id) << ',' << stride_letter(s.entry.stride) << ','
         << csv_field(s.entry.description) << ',' << s.impact << ',' << s.likelihood << ',' << s.score << ','
         << to_string(s.priority) << ',' << to_string(s.mitigation) << ',' << to_string(s.requirement) << '\n';
    }
    return os.str();
  }
  os << "| Component | STRIDE | Description | Priority (Score, I, L) | Mitigation | Requirement |\n"
     << "|---|---|---|---|---|---|\n";
  for (const auto& s : scored) {
    os << "| " << md_cell(s.entry.component_id) << " | " << stride_letter(s.entry.stride) << " | "
       << md_cell(s.entry.description) << " | " << display_name(s.priority) << " (" << s.score << ", I." << s.impact
       << ", L." << s.likelihood << ") | " << display_name(s.mitigation) << " | " << display_name(s.requirement)
       << " |\n";
  }
  return os.str();
}

}  // namespace qoesign::threat
