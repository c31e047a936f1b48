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

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qoesign/threat/threat_model.hpp"

namespace qoesign::threat {

namespace detail {
extern const std::string_view kBundledDatasetJson;
}

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const json& field(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) throw Error(ErrorCode::Validation, where + ": missing field " + name, {name});
  return *it;
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_string()) throw Error(ErrorCode::Validation, where + ": " + name + " must be a string", {name});
  return v.get<std::string>();
}

std::optional<int> optional_scale(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw Error(ErrorCode::Validation, where + ": " + name + " must be an integer", {name});
  return it->get<int>();
}

ThreatRef parse_ref(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::Validation, where + ": same_as must be an object or array", {"same_as"});
  return {string_field(j, "component_id", where), parse_stride(string_field(j, "stride", where))};
}

DfdComponent parse_component(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Validation, "component must be an object");
  DfdComponent c;
  c.id = string_field(j, "id", "component");
  std::string where = "component " + c.id;
  c.kind = parse_component_kind(string_field(j, "kind", where));
  c.label = j.value("label", std::string{});
  if (auto it = j.find("endpoints"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_string() || !(*it)[1].is_string()) {
      throw Error(ErrorCode::Validation, where + ": endpoints must be a pair of ids", {"endpoints"});
    }
    c.endpoints = std::pair((*it)[0].get<std::string>(), (*it)[1].get<std::string>());
  }
  return c;
}

ThreatEntry parse_entry(const json& j, std::size_t position) {
  std::string where = "entry " + std::to_string(position);
  if (!j.is_object()) throw Error(ErrorCode::Validation, where + " must be an object");
  ThreatEntry e;
  e.component_id = string_field(j, "component_id", where);
  e.stride = parse_stride(string_field(j, "stride", where));
  e.description = j.value("description", std::string{});
  e.impact = optional_scale(j, "impact", where);
  e.likelihood = optional_scale(j, "likelihood", where);
  if (auto it = j.find("mitigation"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::Validation, where + ": mitigation must be a string", {"mitigation"});
    e.mitigation = parse_mitigation(it->get<std::string>());
  }
  e.mitigation_note = j.value("mitigation_note", std::string{});
  if (auto it = j.find("same_as"); it != j.end() && !it->is_null()) {
    if (it->is_array()) {
      for (const auto& r : *it) e.same_as.push_back(parse_ref(r, where));
      if (e.same_as.empty()) throw Error(ErrorCode::Validation, where + ": same_as array is empty", {"same_as"});
    } else {
      e.same_as.push_back(parse_ref(*it, where));
    }
  }
  return e;
}

ordered_json ref_json(const ThreatRef& r) {
  return {{"component_id", r.component_id}, {"stride", std::string(to_string(r.stride))}};
}

}  // namespace

ThreatDataset parse_dataset(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Decode, std::string("threat dataset is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Validation, "threat dataset must be an object");
  const json& model = field(doc, "model", "dataset");
  const json& entries = field(doc, "entries", "dataset");
  if (!model.is_object() || !entries.is_array()) {
    throw Error(ErrorCode::Validation, "dataset needs a model object and an entries array");
  }

  ThreatDataset ds;
  ds.model.name = model.value("name", std::string{});
  for (const auto& c : field(model, "components", "model")) ds.model.components.push_back(parse_component(c));
  if (auto it = model.find("trust_boundaries"); it != model.end()) {
    for (const auto& b : *it) {
      TrustBoundary tb;
      tb.id = string_field(b, "id", "trust boundary");
      tb.label = b.value("label", std::string{});
      tb.members = b.value("members", std::vector<std::string>{});
      ds.model.trust_boundaries.push_back(std::move(tb));
    }
  }
  for (std::size_t i = 0; i < entries.size(); ++i) ds.entries.push_back(parse_entry(entries[i], i));
  return ds;
}

std::string serialize_dataset(const ThreatDataset& dataset) {
  ordered_json components = ordered_json::array();
  for (const auto& c : dataset.model.components) {
    ordered_json j = {{"id", c.id}, {"kind", std::string(to_string(c.kind))}, {"label", c.label}};
    if (c.endpoints) j["endpoints"] = {c.endpoints->first, c.endpoints->second};
    components.push_back(std::move(j));
  }
  ordered_json boundaries = ordered_json::array();
  for (const auto& b : dataset.model.trust_boundaries) {
    boundaries.push_back({{"id", b.id}, {"label", b.label}, {"members", b.members}});
  }
  ordered_json entries = ordered_json::array();
  for (const auto& e : dataset.entries) {
    ordered_json j = {{"component_id", e.component_id},
                      {"stride", std::string(to_string(e.stride))},
                      {"description", e.description}};
    if (e.impact) j["impact"] = *e.impact;
    if (e.likelihood) j["likelihood"] = *e.likelihood;
    if (e.mitigation) j["mitigation"] = std::string(to_string(*e.mitigation));
    if (!e.mitigation_note.empty()) j["mitigation_note"] = e.mitigation_note;
    if (e.same_as.size() == 1) {
      j["same_as"] = ref_json(e.same_as.front());
    } else if (!e.same_as.empty()) {
      ordered_json refs = ordered_json::array();
      for (const auto& r : e.same_as) refs.push_back(ref_json(r));
      j["same_as"] = std::move(refs);
    }
    entries.push_back(std::move(j));
  }
  ordered_json doc = {
      {"model", {{"name", dataset.model.name}, {"components", components}, {"trust_boundaries", boundaries}}},
      {"entries", entries}};
  return doc.dump(2, ' ', false) + "\n";
}

ThreatDataset load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open threat dataset " + path, {path});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

std::string_view bundled_dataset_json() { return detail::kBundledDatasetJson; }

const ThreatDataset& bundled_dataset() {
  static const ThreatDataset ds = parse_dataset(detail::kBundledDatasetJson);
  return ds;
}

}  // namespace qoesign::threat
