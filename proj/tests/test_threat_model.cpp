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
#include <map>
#include <sstream>

#include "doctest.h"
#include "qoesign/threat/threat_model.hpp"
#include "support/published_matrix.hpp"

using namespace qoesign;
using namespace qoesign::threat;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DfdModel tiny_model() {
  DfdModel m;
  m.name = "tiny";
  m.components = {{"A", ComponentKind::ExternalEntity, "a", {}},
                  {"B", ComponentKind::Process, "b", {}},
                  {"F", ComponentKind::DataFlow, "f", std::pair<std::string, std::string>("A", "B")}};
  return m;
}

ThreatEntry assessed(std::string c, Stride s, int i, int l, Mitigation m, std::string desc = "x") {
  ThreatEntry e;
  e.component_id = std::move(c);
  e.stride = s;
  e.description = std::move(desc);
  e.impact = i;
  e.likelihood = l;
  e.mitigation = m;
  e.mitigation_note = "note";
  return e;
}

ThreatEntry same(std::string c, Stride s, std::vector<ThreatRef> refs) {
  ThreatEntry e;
  e.component_id = std::move(c);
  e.stride = s;
  e.description = "same";
  e.same_as = std::move(refs);
  return e;
}

const ScoredThreat& find_row(const std::vector<ScoredThreat>& rows, std::string_view c, Stride s) {
  for (const auto& r : rows) {
    if (r.entry.component_id == c && r.entry.stride == s) return r;
  }
  throw std::runtime_error("row not found");
}

// Minimal RFC 4180 reader used as an independent oracle for the CSV writer.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out(1, std::vector<std::string>(1));
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        out.back().back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back().back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.back().emplace_back();
    } else if (c == '\n') {
      out.emplace_back(1);
    } else {
      out.back().back() += c;
    }
  }
  if (out.back().size() == 1 && out.back()[0].empty()) out.pop_back();
  return out;
}

}  // namespace

TEST_SUITE("threat-model") {
  TEST_CASE("priority score examples and range errors") {
    CHECK(priority_score(4, 2) == 8);
    CHECK(priority_score(1, 1) == 1);
    CHECK(priority_score(3, 2) == 6);
    try {
      priority_score(0, 2);
      FAIL("expected validation error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Validation);
      CHECK(std::string(e.what()).find("impact") != std::string::npos);
    }
    try {
      priority_score(2, 5);
      FAIL("expected validation error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Validation);
      CHECK(std::string(e.what()).find("likelihood") != std::string::npos);
    }
    CHECK_THROWS_AS(priority_group(5, 1), Error);
  }

  TEST_CASE("priority group examples and exhaustive table") {
    CHECK(priority_group(4, 1) == Priority::High);
    CHECK(priority_group(3, 2) == Priority::Medium);
    CHECK(priority_group(2, 2) == Priority::Low);

    // Hand-filled grid indexed [impact-1][likelihood-1].
    const char grid[4][5] = {"LLLH", "LLMH", "LMMH", "HHHH"};
    for (int i = 1; i <= 4; ++i) {
      for (int l = 1; l <= 4; ++l) {
        CAPTURE(i);
        CAPTURE(l);
        CHECK(priority_score(i, l) == i * l);
        Priority expect = grid[i - 1][l - 1] == 'H' ? Priority::High
                          : grid[i - 1][l - 1] == 'M' ? Priority::Medium
                                                      : Priority::Low;
        CHECK(priority_group(i, l) == expect);
        CHECK((priority_group(i, l) == Priority::High) == (i * l >= 11 || i == 4 || l == 4));
      }
    }
  }

  TEST_CASE("requirement group examples") {
    CHECK(requirement_group(Priority::High, Mitigation::NeedsImprovement, RuleMode::Table) == Requirement::MustConsider);
    CHECK(requirement_group(Priority::Low, Mitigation::NeedsImprovement, RuleMode::Table) == Requirement::BeAware);
    CHECK(requirement_group(Priority::Low, Mitigation::NeedsImprovement, RuleMode::Stated) == Requirement::Backlog);
    CHECK(requirement_group(Priority::Medium, Mitigation::GoodEnough, RuleMode::Table) == Requirement::Backlog);
  }

  TEST_CASE("stated and table rules differ on exactly the fixed discrepancy set") {
    // Rows: High, Medium, Low. Columns: GoodEnough, NeedsImprovement, OutOfScope.
    const Requirement M = Requirement::MustConsider, A = Requirement::BeAware, B = Requirement::Backlog;
    const Requirement table[3][3] = {{A, M, A}, {B, A, B}, {B, A, B}};
    const Requirement stated[3][3] = {{B, M, B}, {B, A, B}, {B, B, B}};
    const Priority ps[] = {Priority::High, Priority::Medium, Priority::Low};
    const Mitigation ms[] = {Mitigation::GoodEnough, Mitigation::NeedsImprovement, Mitigation::OutOfScope};
    std::vector<std::pair<Priority, Mitigation>> differ;
    for (int p = 0; p < 3; ++p) {
      for (int m = 0; m < 3; ++m) {
        CHECK(requirement_group(ps[p], ms[m], RuleMode::Table) == table[p][m]);
        CHECK(requirement_group(ps[p], ms[m], RuleMode::Stated) == stated[p][m]);
        if (requirement_group(ps[p], ms[m], RuleMode::Table) != requirement_group(ps[p], ms[m], RuleMode::Stated)) {
          differ.emplace_back(ps[p], ms[m]);
        }
      }
    }
    std::vector<std::pair<Priority, Mitigation>> expected = {{Priority::High, Mitigation::GoodEnough},
                                                             {Priority::High, Mitigation::OutOfScope},
                                                             {Priority::Low, Mitigation::NeedsImprovement}};
    CHECK(differ == expected);
  }

  TEST_CASE("bundled dataset reproduces every assessed published row in table mode") {
    const auto& ds = bundled_dataset();
    CHECK(ds.entries.size() == 57);
    auto scored = score_model(ds.model, ds.entries, RuleMode::Table);
    REQUIRE(scored.size() == ds.entries.size());
    std::size_t assessed_rows = 0;
    for (const auto& s : scored) assessed_rows += s.entry.same_as.empty() ? 1 : 0;
    CHECK(assessed_rows == testing::published_rows().size());
    int mismatches = 0;
    for (const auto& g : testing::published_rows()) {
      const auto& r = find_row(scored, g.component, g.stride);
      CAPTURE(g.component);
      CAPTURE(stride_letter(g.stride));
      CHECK(r.entry.same_as.empty());
      bool ok = r.impact == g.impact && r.likelihood == g.likelihood && r.score == g.score &&
                r.priority == g.priority && r.mitigation == g.mitigation && r.requirement == g.requirement;
      CHECK(ok);
      mismatches += ok ? 0 : 1;
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("same_as rows inherit the referent, the most severe one when several") {
    const auto& ds = bundled_dataset();
    auto scored = score_model(ds.model, ds.entries);
    const auto& df2e = find_row(scored, "DF-2", Stride::E);
    CHECK(df2e.resolved_from == ThreatRef{"DF-2", Stride::S});
    CHECK(df2e.score == 4);
    CHECK(df2e.requirement == Requirement::BeAware);
    // S resolves to Backlog, R to MustConsider.
    const auto& if1be = find_row(scored, "IF-1.b", Stride::E);
    CHECK(if1be.resolved_from == ThreatRef{"IF-1.b", Stride::R});
    CHECK(if1be.requirement == Requirement::MustConsider);
    // D and E are both MustConsider; E has the higher score.
    const auto& sp3r = find_row(scored, "SignP-3", Stride::R);
    CHECK(sp3r.resolved_from == ThreatRef{"SignP-3", Stride::E});
    CHECK(sp3r.score == 8);
    CHECK(find_row(scored, "DS-QTSP-HSM", Stride::S).requirement == Requirement::MustConsider);
    CHECK(find_row(scored, "DS-User-SE", Stride::R).resolved_from == ThreatRef{"SignP-2.a", Stride::R});
  }

  TEST_CASE("ties between referents keep the first listed") {
    auto m = tiny_model();
    std::vector<ThreatEntry> es = {assessed("A", Stride::S, 2, 2, Mitigation::GoodEnough),
                                   assessed("A", Stride::T, 2, 2, Mitigation::OutOfScope),
                                   same("B", Stride::S, {{"A", Stride::T}, {"A", Stride::S}})};
    auto scored = score_model(m, es);
    CHECK(find_row(scored, "B", Stride::S).resolved_from == ThreatRef{"A", Stride::T});
    CHECK(find_row(scored, "B", Stride::S).mitigation == Mitigation::OutOfScope);
  }

  TEST_CASE("output ordering is component id then STRIDE order") {
    const auto& ds = bundled_dataset();
    auto scored = score_model(ds.model, ds.entries);
    for (std::size_t i = 1; i < scored.size(); ++i) {
      const auto& a = scored[i - 1].entry;
      const auto& b = scored[i].entry;
      bool ordered = a.component_id < b.component_id ||
                     (a.component_id == b.component_id && static_cast<int>(a.stride) < static_cast<int>(b.stride));
      CHECK(ordered);
    }
    CHECK(scored.front().entry.component_id == "DF-2");
    CHECK(scored.front().entry.stride == Stride::S);
  }

  TEST_CASE("score_model is pure") {
    const auto& ds = bundled_dataset();
    auto a = render_matrix(score_model(ds.model, ds.entries), MatrixFormat::Csv);
    auto b = render_matrix(score_model(ds.model, ds.entries), MatrixFormat::Csv);
    CHECK(a == b);
    auto reversed = ds.entries;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(render_matrix(score_model(ds.model, reversed), MatrixFormat::Csv) == a);
  }

  TEST_CASE("empty entries, self reference, cycles and dangling references") {
    auto m = tiny_model();
    CHECK(score_model(m, {}).empty());

    try {
      score_model(m, {same("A", Stride::S, {{"A", Stride::S}})});
      FAIL("expected cycle");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ReferenceCycle);
      CHECK(e.details() == std::vector<std::string>{"A S"});
    }

    try {
      score_model(m, {same("A", Stride::S, {{"B", Stride::S}}), same("B", Stride::S, {{"A", Stride::S}}),
                      assessed("F", Stride::T, 1, 1, Mitigation::GoodEnough)});
      FAIL("expected cycle");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ReferenceCycle);
      CHECK(e.details().size() == 2);
    }

    try {
      score_model(m, {assessed("Z", Stride::S, 1, 1, Mitigation::GoodEnough), same("A", Stride::D, {{"B", Stride::I}})});
      FAIL("expected dangling");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DanglingReference);
      CHECK(e.details().size() == 2);
    }
  }

  TEST_CASE("chains resolve within three hops and no further") {
    auto m = tiny_model();
    std::vector<ThreatEntry> es = {assessed("A", Stride::S, 4, 2, Mitigation::NeedsImprovement),
                                   same("A", Stride::T, {{"A", Stride::S}}), same("A", Stride::R, {{"A", Stride::T}}),
                                   same("A", Stride::I, {{"A", Stride::R}})};
    auto scored = score_model(m, es);
    CHECK(find_row(scored, "A", Stride::I).score == 8);
    CHECK(find_row(scored, "A", Stride::I).resolved_from == ThreatRef{"A", Stride::S});
    es.push_back(same("A", Stride::D, {{"A", Stride::I}}));
    try {
      score_model(m, es);
      FAIL("expected hop limit");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Validation);
      CHECK(e.details() == std::vector<std::string>{"A D"});
    }
  }

  TEST_CASE("entry shape is enforced") {
    auto m = tiny_model();
    auto mixed = same("A", Stride::T, {{"A", Stride::S}});
    mixed.impact = 2;
    CHECK_THROWS_AS(score_model(m, {assessed("A", Stride::S, 1, 1, Mitigation::GoodEnough), mixed}), Error);
    auto missing = assessed("A", Stride::S, 1, 1, Mitigation::GoodEnough);
    missing.mitigation.reset();
    CHECK_THROWS_AS(score_model(m, {missing}), Error);
    CHECK_THROWS_AS(score_model(m, {assessed("A", Stride::S, 5, 1, Mitigation::GoodEnough)}), Error);
    CHECK_THROWS_AS(score_model(m, {assessed("A", Stride::S, 1, 1, Mitigation::GoodEnough),
                                    assessed("A", Stride::S, 2, 1, Mitigation::GoodEnough)}),
                    Error);
  }

  TEST_CASE("DFD model invariants") {
    CHECK_NOTHROW(tiny_model().validate());
    CHECK_NOTHROW(bundled_dataset().model.validate());

    auto dup = tiny_model();
    dup.components.push_back({"A", ComponentKind::Process, "again", {}});
    CHECK_THROWS_AS(dup.validate(), Error);

    auto no_ends = tiny_model();
    no_ends.components[2].endpoints.reset();
    CHECK_THROWS_AS(no_ends.validate(), Error);

    auto extra_ends = tiny_model();
    extra_ends.components[1].endpoints = std::pair<std::string, std::string>("A", "A");
    CHECK_THROWS_AS(extra_ends.validate(), Error);

    auto flow_to_flow = tiny_model();
    flow_to_flow.components.push_back({"G", ComponentKind::InfoFlow, "g", std::pair<std::string, std::string>("A", "F")});
    try {
      flow_to_flow.validate();
      FAIL("expected validation error");
    } catch (const Error& e) {
      CHECK(e.details().size() == 1);
    }

    auto dangling_end = tiny_model();
    dangling_end.components[2].endpoints->second = "nowhere";
    CHECK_THROWS_AS(dangling_end.validate(), Error);
  }

  TEST_CASE("csv rendering") {
    CHECK(render_matrix({}, MatrixFormat::Csv) ==
          "component,stride,description,impact,likelihood,score,priority,mitigation,requirement\n");
    auto m = tiny_model();
    auto scored = score_model(m, {assessed("A", Stride::I, 4, 2, Mitigation::NeedsImprovement, "leak, \"bad\"\nnews")});
    std::string csv = render_matrix(scored, MatrixFormat::Csv);
    auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1] == std::vector<std::string>{"A", "I", "leak, \"bad\"\nnews", "4", "2", "8", "high",
                                              "needs_improvement", "must_consider"});

    const auto& ds = bundled_dataset();
    std::string full = render_matrix(score_model(ds.model, ds.entries), MatrixFormat::Csv);
    auto parsed = parse_csv(full);
    CHECK(parsed.size() == ds.entries.size() + 1);
    for (const auto& row : parsed) CHECK(row.size() == 9);
  }

  TEST_CASE("csv of the bundled dataset matches the golden file") {
    const auto& ds = bundled_dataset();
    std::string golden = read_file(QOESIGN_SOURCE_DIR "/tests/golden/ida_qes_matrix_table.csv");
    REQUIRE_FALSE(golden.empty());
    CHECK(render_matrix(score_model(ds.model, ds.entries, RuleMode::Table), MatrixFormat::Csv) == golden);
  }

  TEST_CASE("markdown rendering") {
    std::string empty = render_matrix({}, MatrixFormat::Markdown);
    CHECK(std::count(empty.begin(), empty.end(), '\n') == 2);
    CHECK(empty.rfind("| Component |", 0) == 0);

    const auto& ds = bundled_dataset();
    std::string md = render_matrix(score_model(ds.model, ds.entries), MatrixFormat::Markdown);
    std::istringstream lines(md);
    std::string line;
    bool found = false;
    while (std::getline(lines, line)) {
      if (line.rfind("| DF-2 | I |", 0) == 0) {
        found = true;
        CHECK(line.find("MustConsider") != std::string::npos);
        CHECK(line.find("High (8, I.4, L.2)") != std::string::npos);
      }
    }
    CHECK(found);

    auto scored = score_model(tiny_model(), {assessed("A", Stride::S, 1, 1, Mitigation::GoodEnough, "a|b")});
    CHECK(render_matrix(scored, MatrixFormat::Markdown).find("a\\|b") != std::string::npos);
  }

  TEST_CASE("dataset parsing and serialization") {
    CHECK(serialize_dataset(bundled_dataset()) == bundled_dataset_json());
    CHECK(bundled_dataset_json() == read_file(QOESIGN_SOURCE_DIR "/data/ida_qes_threats.json"));

    auto ds = parse_dataset(R"({"model":{"components":[{"id":"A","kind":"process"}]},
      "entries":[{"component_id":"A","stride":"S","impact":2,"likelihood":3,"mitigation":"good_enough"},
                 {"component_id":"A","stride":"tampering","same_as":{"component_id":"A","stride":"s"}}]})");
    REQUIRE(ds.entries.size() == 2);
    CHECK(ds.entries[0].stride == Stride::S);
    CHECK(ds.entries[1].same_as == std::vector<ThreatRef>{{"A", Stride::S}});
    CHECK(score_model(ds.model, ds.entries)[1].score == 6);

    CHECK_THROWS_AS(parse_dataset("{"), Error);
    CHECK_THROWS_AS(parse_dataset(R"({"model":{"components":[]},"entries":[{"component_id":"A","stride":"Q"}]})"), Error);
    CHECK_THROWS_AS(parse_dataset(R"({"model":{"components":[{"id":"A","kind":"cloud"}]},"entries":[]})"), Error);
    CHECK_THROWS_AS(
        parse_dataset(R"({"model":{"components":[]},"entries":[{"component_id":"A","stride":"S","mitigation":"fine"}]})"),
        Error);
    try {
      load_dataset_file("/nonexistent/threats.json");
      FAIL("expected io error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Io);
    }
  }

  TEST_CASE("enum spellings are lowercase in data and display names in markdown") {
    CHECK(to_string(Mitigation::NeedsImprovement) == "needs_improvement");
    CHECK(to_string(ComponentKind::InfoFlow) == "info_flow");
    CHECK(display_name(Requirement::MustConsider) == "MustConsider");
    CHECK(parse_component_kind("info_flow") == ComponentKind::InfoFlow);
    CHECK(parse_rule_mode("Stated") == RuleMode::Stated);
    CHECK(parse_matrix_format("markdown") == MatrixFormat::Markdown);
    CHECK_THROWS_AS(parse_rule_mode("loose"), Error);
    for (auto s : kStrideOrder) CHECK(parse_stride(to_string(s)) == s);
  }
}
