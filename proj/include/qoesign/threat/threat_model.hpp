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

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qoesign/errors.hpp"

namespace qoesign::threat {

enum class ComponentKind { ExternalEntity, Process, DataStore, DataFlow, InfoFlow };
enum class Stride { S, T, R, I, D, E };
enum class Mitigation { GoodEnough, NeedsImprovement, OutOfScope };
enum class Priority { High, Medium, Low };
enum class Requirement { MustConsider, BeAware, Backlog };
enum class RuleMode { Stated, Table };
enum class MatrixFormat { Csv, Markdown };

inline constexpr Stride kStrideOrder[] = {Stride::S, Stride::T, Stride::R, Stride::I, Stride::D, Stride::E};

// Lowercase dataset spellings ("info_flow", "denial_of_service", ...).
std::string_view to_string(ComponentKind k);
std::string_view to_string(Stride s);
std::string_view to_string(Mitigation m);
std::string_view to_string(Priority p);
std::string_view to_string(Requirement r);
std::string_view to_string(RuleMode m);
char stride_letter(Stride s);

// Display names used in markdown ("MustConsider", "NeedsImprovement").
std::string_view display_name(Mitigation m);
std::string_view display_name(Priority p);
std::string_view display_name(Requirement r);

// Parsers throw Validation naming the rejected value.
ComponentKind parse_component_kind(std::string_view s);
Stride parse_stride(std::string_view s);  // full name or single letter, any case
Mitigation parse_mitigation(std::string_view s);
RuleMode parse_rule_mode(std::string_view s);
MatrixFormat parse_matrix_format(std::string_view s);

struct DfdComponent {
  std::string id;
  ComponentKind kind = ComponentKind::Process;
  std::string label;
  std::optional<std::pair<std::string, std::string>> endpoints;  // flows only
};

struct TrustBoundary {
  std::string id;
  std::string label;
  std::vector<std::string> members;
};

struct DfdModel {
  std::string name;
  std::vector<DfdComponent> components;
  std::vector<TrustBoundary> trust_boundaries;

  const DfdComponent* find(std::string_view id) const;
  // Throws Validation listing every violated component invariant.
  void validate() const;
};

struct ThreatRef {
  std::string component_id;
  Stride stride = Stride::S;
  bool operator==(const ThreatRef&) const = default;
};

// Either assessed (impact, likelihood, mitigation set) or a same_as row with
// all three absent. Several referents are allowed; the most severe wins.
struct ThreatEntry {
  std::string component_id;
  Stride stride = Stride::S;
  std::string description;
  std::optional<int> impact;
  std::optional<int> likelihood;
  std::optional<Mitigation> mitigation;
  std::string mitigation_note;
  std::vector<ThreatRef> same_as;

  ThreatRef ref() const { return {component_id, stride}; }
};

struct ScoredThreat {
  ThreatEntry entry;
  int impact = 0;
  int likelihood = 0;
  Mitigation mitigation = Mitigation::OutOfScope;
  std::string mitigation_note;
  int score = 0;
  Priority priority = Priority::Low;
  Requirement requirement = Requirement::Backlog;
  RuleMode rule_mode = RuleMode::Table;
  std::optional<ThreatRef> resolved_from;  // set for same_as rows
};

struct ThreatDataset {
  DfdModel model;
  std::vector<ThreatEntry> entries;
};

inline constexpr int kMaxSameAsHops = 3;

int priority_score(int impact, int likelihood);
Priority priority_group(int impact, int likelihood);
Requirement requirement_group(Priority priority, Mitigation mitigation, RuleMode mode);

// Pure. Output ordered by (component_id, STRIDE order). Throws
// DanglingReference or ReferenceCycle with the offenders in details().
std::vector<ScoredThreat> score_model(const DfdModel& model, const std::vector<ThreatEntry>& entries,
                                      RuleMode mode = RuleMode::Table);

std::string render_matrix(const std::vector<ScoredThreat>& scored, MatrixFormat format);

ThreatDataset parse_dataset(std::string_view json_text);
std::string serialize_dataset(const ThreatDataset& dataset);
ThreatDataset load_dataset_file(const std::string& path);

// Compiled-in copy of data/ida_qes_threats.json.
std::string_view bundled_dataset_json();
const ThreatDataset& bundled_dataset();

}  // namespace qoesign::threat
