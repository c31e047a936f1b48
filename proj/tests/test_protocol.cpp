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

#include <algorithm>
#include <set>

#include "doctest.h"
#include "qoesign/protocol/local_cluster.hpp"
#include "qoesign/protocol/migration.hpp"
#include "support/flaky_store.hpp"
#include "support/oracles.hpp"
#include "support/protocol_harness.hpp"
#include "support/scripted_random.hpp"

using namespace qoesign;
using namespace qoesign::protocol;
using qoesign::testing::message;
using qoesign::testing::ProtocolHarness;

namespace {

const BigInt kToyQ = 11;

std::int64_t toy_value(const Element& e) { return static_cast<std::int64_t>(big_from_be(e.encoding)); }
std::int64_t scalar_value(const FieldElement& f) { return static_cast<std::int64_t>(f.value()); }

Polynomial toy_poly(std::initializer_list<long long> coeffs) {
  std::vector<FieldElement> c;
  for (auto v : coeffs) c.emplace_back(v, kToyQ);
  return Polynomial(c);
}

// The worked fixture: f1 = 3+2x, f2 = 1+x, f3 = 4+5x, s_U = 2 over F_11.
DkgResult fixture_dkg() {
  auto suite = make_default_registry().resolve("schnorr-toy-v1");
  const Group& g = *suite.group;
  std::vector<Dealing> dealings = {make_dealing(1, toy_poly({3, 2}), g, 3), make_dealing(2, toy_poly({1, 1}), g, 3),
                                   make_dealing(3, toy_poly({4, 5}), g, 3)};
  return finalize_dkg({2, 3, true}, suite, dealings, FieldElement(2, kToyQ));
}

std::vector<std::vector<std::uint32_t>> subsets(std::uint32_t n) {
  std::vector<std::vector<std::uint32_t>> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::uint32_t> s;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(i + 1);
    }
    out.push_back(s);
  }
  return out;
}

// Test-only oracle: s_U + sum lambda_i s_i over the given QTSP indices.
FieldElement reconstruct(const DkgResult& d, const std::vector<std::uint32_t>& idx) {
  FieldElement acc = d.user_share.secret;
  for (auto i : idx) acc += lagrange_coefficient(idx, i, acc.modulus()) * d.qtsp_shares[i - 1].secret;
  return acc;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Validation;
}

}  // namespace

TEST_SUITE("signing-protocol") {
  TEST_CASE("access structure bounds") {
    CHECK_NOTHROW(AccessStructure{1, 1, true}.validate());
    CHECK_THROWS_AS((AccessStructure{0, 3, true}.validate()), Error);
    CHECK_THROWS_AS((AccessStructure{4, 3, true}.validate()), Error);
    CHECK_THROWS_AS((AccessStructure{1, 0, true}.validate()), Error);
    CHECK(Holder::parse("qtsp-12") == Holder::qtsp(12));
    CHECK(Holder::parse("user") == Holder::user());
    CHECK_THROWS_AS(Holder::parse("qtsp-0"), Error);
  }

  TEST_CASE("dkg fixture: injected polynomials give shares 5, 2, 10 and PK 2^10") {
    DkgResult d = fixture_dkg();
    // Oracle: sum of the three polynomials evaluated with plain integers.
    const std::vector<std::vector<std::int64_t>> polys = {{3, 2}, {1, 1}, {4, 5}};
    for (std::int64_t i = 1; i <= 3; ++i) {
      std::int64_t expect = 0;
      for (const auto& p : polys) expect += oracle::evaluate(p, i, 11);
      CHECK(scalar_value(d.qtsp_shares[i - 1].secret) == oracle::mod(expect, 11));
    }
    CHECK(scalar_value(d.qtsp_shares[0].secret) == 5);
    CHECK(scalar_value(d.qtsp_shares[1].secret) == 2);
    CHECK(scalar_value(d.qtsp_shares[2].secret) == 10);
    CHECK(toy_value(d.key.group_public_key) == oracle::pow_mod(2, 2 + 8, 23));
    CHECK(toy_value(d.key.group_public_key) == 12);
    CHECK(toy_value(d.key.user_public_share) == 4);
    CHECK(d.key.epoch == 0);
    CHECK_NOTHROW(d.key.check_consistency(*toy_group()));
    for (std::uint32_t i = 1; i <= 3; ++i) {
      CHECK(toy_value(d.key.qtsp_public_shares.at(i)) == oracle::pow_mod(2, scalar_value(d.qtsp_shares[i - 1].secret), 23));
    }
  }

  TEST_CASE("dkg aborts naming the dealer whose share fails verification") {
    auto suite = make_default_registry().resolve("schnorr-toy-v1");
    const Group& g = *suite.group;
    for (std::uint32_t bad = 1; bad <= 3; ++bad) {
      std::vector<Dealing> dealings = {make_dealing(1, toy_poly({3, 2}), g, 3), make_dealing(2, toy_poly({1, 1}), g, 3),
                                       make_dealing(3, toy_poly({4, 5}), g, 3)};
      dealings[bad - 1].shares.at(2) += FieldElement(1, kToyQ);
      try {
        finalize_dkg({2, 3, true}, suite, dealings, FieldElement(2, kToyQ));
        FAIL("expected DkgAbort");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DkgAbort);
        CHECK(e.details() == std::vector<std::string>{"qtsp-" + std::to_string(bad)});
      }
    }
    std::vector<Dealing> short_commit = {make_dealing(1, toy_poly({3}), g, 3), make_dealing(2, toy_poly({1, 1}), g, 3),
                                         make_dealing(3, toy_poly({4, 5}), g, 3)};
    CHECK(code_of([&] { finalize_dkg({2, 3, true}, suite, short_commit, FieldElement(2, kToyQ)); }) ==
          ErrorCode::DkgAbort);
    auto lamport = make_default_registry().resolve("lamport-ots-v1");
    SeededRandom rng(1, "x");
    CHECK(code_of([&] { dkg({1, 1, true}, lamport, rng); }) == ErrorCode::Parameter);
  }

  TEST_CASE("identity joint key is redrawn by the user") {
    auto suite = make_default_registry().resolve("schnorr-toy-v1");
    // Dealer constants sum to 3; a user draw of 8 would cancel to the identity.
    testing::ScriptedRandom dealer({3, 1});
    testing::ScriptedRandom user({8, 5});
    DkgResult d = dkg({1, 1, true}, suite, user, {&dealer});
    CHECK(scalar_value(d.user_share.secret) == 5);
    CHECK(toy_value(d.key.group_public_key) == oracle::pow_mod(2, 8, 23));
    std::vector<Dealing> cancel = {make_dealing(1, toy_poly({3}), *suite.group, 1)};
    CHECK(code_of([&] { finalize_dkg({1, 1, true}, suite, cancel, FieldElement(8, kToyQ)); }) == ErrorCode::InvalidKey);
  }

  TEST_CASE("key secrecy oracle: user share plus any t QTSP shares gives the dlog of PK") {
    auto suite = make_default_registry().resolve("schnorr-toy-v1");
    for (std::uint32_t n = 1; n <= 5; ++n) {
      for (std::uint32_t t = 1; t <= n; ++t) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          SeededRandom rng(seed * 100 + n * 10 + t, "dkg");
          DkgResult d = dkg({t, n, true}, suite, rng);
          std::int64_t dlog = oracle::toy_dlog(toy_value(d.key.group_public_key));
          for (const auto& s : subsets(n)) {
            if (s.size() != t) continue;
            CHECK(scalar_value(reconstruct(d, s)) == dlog);
          }
        }
      }
    }
  }

  TEST_CASE("participant selection") {
    CHECK(choose_participants({3, 5, true}, {2, 3, 4, 5}) == std::vector<std::uint32_t>{2, 3, 4});
    CHECK(choose_participants({3, 3, true}, {1, 2, 3}) == std::vector<std::uint32_t>{1, 2, 3});
    try {
      choose_participants({3, 5, true}, {1, 4});
      FAIL("expected insufficient quorum");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientQuorum);
      CHECK(e.details() == std::vector<std::string>{"qtsp-1", "qtsp-4"});
    }
    ProtocolHarness h("schnorr-toy-v1", AccessStructure{3, 5, true}, 11);
    SeededRandom rng(3, "sid");
    auto s = SigningSession::start(h.result.key, h.suite, message(1), {2, 3, 4, 5}, rng);
    CHECK(s.state() == SessionState::AwaitingUserApproval);
    CHECK(s.participants() ==
          std::vector<Holder>{Holder::user(), Holder::qtsp(2), Holder::qtsp(3), Holder::qtsp(4)});
    CHECK(code_of([&] { SigningSession::start(h.result.key, h.suite, message(1), {1, 4}, rng); }) ==
          ErrorCode::InsufficientQuorum);
    auto ades = h.result.key;
    ades.access.user_mandatory = false;
    CHECK(code_of([&] { SigningSession::start(ades, h.suite, message(1), {1, 2, 3}, rng); }) == ErrorCode::Parameter);
  }

  TEST_CASE("approval transitions and ledger record of denial") {
    ProtocolHarness h("schnorr-toy-v1", fixture_dkg());
    SeededRandom rng(5, "sid");
    auto s = SigningSession::start(h.result.key, h.suite, message(2), h.all(), rng);
    s.approve(Decision::Approve, h.ledger.get());
    CHECK(s.state() == SessionState::NonceCommitment);

    auto denied = SigningSession::start(h.result.key, h.suite, message(3), h.all(), rng);
    denied.approve(Decision::Deny, h.ledger.get());
    CHECK(denied.state() == SessionState::Aborted);
    CHECK(denied.abort_reason() == AbortReason::UserDenied);
    auto entries = h.ledger->entries();
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].kind == ledger::EntryKind::SessionDenied);
    CHECK(entries[0].session_id == denied.session_id());
    CHECK(code_of([&] { denied.approve(Decision::Approve, h.ledger.get()); }) == ErrorCode::StateViolation);

    auto sig = h.run(message(4), h.all());
    (void)sig;
    CHECK(h.ledger->entries().back().kind == ledger::EntryKind::SessionCompleted);
    auto done = h.begin(message(5), h.all());
    h.commit_all(done);
    h.partial_all(done);
    done.aggregate(*h.ledger);
    CHECK(done.state() == SessionState::Completed);
    CHECK(code_of([&] { done.approve(Decision::Approve, h.ledger.get()); }) == ErrorCode::StateViolation);
    CHECK(code_of([&] { done.abort(AbortReason::Timeout); }) == ErrorCode::StateViolation);
  }

  TEST_CASE("toy fixture with injected nonces: z = r_total + c * s_total") {
    auto suite = make_default_registry().resolve("schnorr-toy-v1");
    DkgResult d = fixture_dkg();
    auto ledger = ledger::SigningLedger("u", std::make_unique<ledger::MemoryLedgerStore>(), ledger::fixed_clock(1));
    testing::ScriptedRandom ru({4}), r1({7}), r2({9});
    UserSigner user(d.user_share, d.key, suite, ru);
    SignerNode q1(d.qtsp_shares[0], d.key, suite, r1);
    SignerNode q2(d.qtsp_shares[1], d.key, suite, r2);
    SessionId sid{};
    sid[15] = 1;
    auto s = SigningSession::start(d.key, suite, message(9), {1, 2, 3}, sid);
    user.record_decision(sid, message(9), Decision::Approve);
    s.approve(Decision::Approve, &ledger);
    NonceRequest req{sid, message(9), suite.suite_id, 0, s.participants()};
    s.contribute_nonce(Holder::user(), user.commit_nonce(req));
    s.contribute_nonce(Holder::qtsp(1), q1.commit_nonce(req));
    CHECK(s.state() == SessionState::NonceCommitment);
    s.contribute_nonce(Holder::qtsp(2), q2.commit_nonce(req));
    CHECK(s.state() == SessionState::PartialSigning);
    CHECK(toy_value(*s.aggregate_commitment()) == oracle::pow_mod(2, 4 + 7 + 9, 23));

    s.contribute_partial(Holder::user(), user.sign_partial(sid, s.commitments()));
    s.contribute_partial(Holder::qtsp(1), q1.sign_partial(sid, s.commitments()));
    s.contribute_partial(Holder::qtsp(2), q2.sign_partial(sid, s.commitments()));
    Signature sig = s.aggregate(ledger);
    CHECK(s.state() == SessionState::Completed);

    std::int64_t c = scalar_value(*s.challenge());
    std::int64_t s_total = 2 + 3 + 1 + 4;  // s_U + f1(0) + f2(0) + f3(0)
    CHECK(scalar_value(reconstruct(d, {1, 2})) == oracle::mod(s_total, 11));
    auto parts = decode_schnorr(suite, sig);
    CHECK(scalar_value(parts.response) == oracle::mod(4 + 7 + 9 + c * s_total, 11));
    CHECK(schnorr_verify(suite, d.key.group_public_key, message(9), sig, sid));
    CHECK(ledger.entries().back().signature == sig.to_wire());
  }

  TEST_CASE("a partial offset by one is attributed to exactly that holder") {
    ProtocolHarness h("schnorr-toy-v1", fixture_dkg());
    for (const auto& culprit : {Holder::user(), Holder::qtsp(1), Holder::qtsp(3)}) {
      auto s = h.begin(message(20), {1, 3});
      h.commit_all(s);
      for (const auto& p : s.participants()) {
        FieldElement z = h.node(p).sign_partial(s.session_id(), s.commitments());
        if (p == culprit) {
          z += FieldElement(1, kToyQ);
          try {
            s.contribute_partial(p, z);
            FAIL("expected misbehavior");
          } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Misbehavior);
            CHECK(e.details() == std::vector<std::string>{culprit.name()});
          }
          break;
        }
        s.contribute_partial(p, z);
      }
      CHECK(s.state() == SessionState::Aborted);
      CHECK(s.abort_reason() == AbortReason::Misbehavior);
      CHECK(s.misbehaving() == culprit);
      // Restart with a fresh session completes.
      auto again = h.begin(message(20), {1, 3});
      CHECK(again.session_id() != s.session_id());
      h.commit_all(again);
      h.partial_all(again);
      CHECK(h.verifies(again.aggregate(*h.ledger), message(20), again.session_id()));
    }
  }

  TEST_CASE("contributions from non-participants, duplicates and wrong phases are rejected") {
    ProtocolHarness h("schnorr-toy-v1", AccessStructure{2, 3, true}, 21);
    auto s = h.begin(message(30), {1, 2, 3});
    CHECK(s.qtsp_participants() == std::vector<std::uint32_t>{1, 2});
    Element r3 = toy_group()->exp_generator(FieldElement(3, kToyQ));
    CHECK(code_of([&] { s.contribute_nonce(Holder::qtsp(3), r3); }) == ErrorCode::ProtocolViolation);
    CHECK(s.commitments().empty());
    CHECK(code_of([&] { s.contribute_partial(Holder::qtsp(1), FieldElement(1, kToyQ)); }) == ErrorCode::StateViolation);
    s.contribute_nonce(Holder::user(), h.user->commit_nonce(h.request(s)));
    CHECK(code_of([&] { s.contribute_nonce(Holder::user(), r3); }) == ErrorCode::ProtocolViolation);
    CHECK(code_of([&] { s.contribute_nonce(Holder::qtsp(1), toy_group()->identity()); }) ==
          ErrorCode::ProtocolViolation);
    CHECK(code_of([&] { s.contribute_nonce(Holder::qtsp(1), Element{{0, 0, 0, 5}}); }) == ErrorCode::ProtocolViolation);
    for (std::uint32_t i : {1u, 2u}) s.contribute_nonce(Holder::qtsp(i), h.qtsps[i - 1]->commit_nonce(h.request(s)));
    CHECK(s.state() == SessionState::PartialSigning);
    CHECK(code_of([&] { s.aggregate(*h.ledger); }) == ErrorCode::NotReady);
    auto before = s.partials().size();
    CHECK(code_of([&] { s.contribute_partial(Holder::qtsp(3), FieldElement(1, kToyQ)); }) ==
          ErrorCode::ProtocolViolation);
    CHECK(s.partials().size() == before);
    CHECK(s.state() == SessionState::PartialSigning);
    FieldElement zu = h.user->sign_partial(s.session_id(), s.commitments());
    s.contribute_partial(Holder::user(), zu);
    CHECK(code_of([&] { s.contribute_partial(Holder::user(), zu); }) == ErrorCode::ProtocolViolation);
    try {
      s.aggregate(*h.ledger);
      FAIL("expected not ready");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotReady);
      CHECK(e.details() == std::vector<std::string>{"qtsp-1", "qtsp-2"});
    }
  }

  TEST_CASE("every 3-subset of 5 QTSPs plus the user signs; bytes differ") {
    ProtocolHarness h("schnorr-prod-v1", AccessStructure{3, 5, true}, 31);
    std::set<Bytes> distinct;
    int verified = 0;
    for (const auto& s : subsets(5)) {
      if (s.size() != 3) continue;
      auto session = h.begin(message(40), std::set<std::uint32_t>(s.begin(), s.end()));
      CHECK(session.qtsp_participants() == s);
      h.commit_all(session);
      h.partial_all(session);
      Signature sig = session.aggregate(*h.ledger);
      verified += h.verifies(sig, message(40), session.session_id()) ? 1 : 0;
      distinct.insert(sig.payload);
    }
    CHECK(verified == 10);
    CHECK(distinct.size() == 10);
  }

  TEST_CASE("user-mandatory: QTSP partials alone never verify, with the user iff |S| >= t") {
    for (std::uint32_t n = 1; n <= 5; ++n) {
      std::uint32_t t = (n + 1) / 2;
      ProtocolHarness h("schnorr-prod-v1", AccessStructure{t, n, true}, 40 + n);
      const Group& g = *h.suite.group;
      for (const auto& s : subsets(n)) {
        CAPTURE(n);
        CAPTURE(s.size());
        if (s.size() >= t && !s.empty()) {
          auto session = h.begin(message(50), std::set<std::uint32_t>(s.begin(), s.end()));
          h.commit_all(session);
          h.partial_all(session);
          // Dropping the user's partial and commitment never verifies.
          FieldElement zq(0, g.order());
          Element rq = g.identity();
          for (const auto& p : session.participants()) {
            if (p.is_user()) continue;
            zq += session.partials().at(p);
            rq = g.op(rq, session.commitments().at(p));
          }
          Signature forged = encode_schnorr(h.suite, {rq, zq});
          CHECK_FALSE(h.verifies(forged, message(50), session.session_id()));
          CHECK(code_of([&] {
                  auto copy = session;
                  copy.contribute_partial(Holder::user(), FieldElement(0, g.order()));
                }) == ErrorCode::ProtocolViolation);
          CHECK(h.verifies(session.aggregate(*h.ledger), message(50), session.session_id()));
        } else {
          CHECK(code_of([&] { h.begin(message(50), std::set<std::uint32_t>(s.begin(), s.end())); }) ==
                ErrorCode::InsufficientQuorum);
          // Even combining the user with fewer than t QTSPs cannot produce a valid z.
          if (s.empty()) continue;
          SessionId sid{};
          sid[0] = static_cast<std::uint8_t>(s.size());
          FieldElement r(12345, g.order());
          Element big_r = g.exp_generator(r);
          FieldElement c = schnorr_challenge(h.suite, sid, big_r, h.result.key.group_public_key, message(50));
          FieldElement partial_secret = reconstruct(h.result, s);
          Signature forged = encode_schnorr(h.suite, {big_r, r + c * partial_secret});
          CHECK_FALSE(h.verifies(forged, message(50), sid));
        }
      }
    }
  }

  TEST_CASE("all QTSP partials without the user's cannot aggregate") {
    ProtocolHarness h("schnorr-prod-v1", AccessStructure{3, 5, true}, 61);
    auto s = h.begin(message(60), h.all());
    h.commit_all(s);
    for (const auto& p : s.participants()) {
      if (!p.is_user()) s.contribute_partial(p, h.node(p).sign_partial(s.session_id(), s.commitments()));
    }
    CHECK(code_of([&] { s.aggregate(*h.ledger); }) == ErrorCode::NotReady);
  }

  TEST_CASE("robustness: any 2 of 5 QTSPs may drop at any step; 3 drops lose quorum") {
    ProtocolHarness h("schnorr-prod-v1", AccessStructure{3, 5, true}, 71);
    enum Step { BeforeStart, AfterApproval, AfterNonces, DuringPartials };
    int completed = 0;
    for (const auto& dead : subsets(5)) {
      if (dead.size() != 2) continue;
      for (Step step : {BeforeStart, AfterApproval, AfterNonces, DuringPartials}) {
        std::set<std::uint32_t> alive = h.all();
        if (step == BeforeStart) {
          for (auto d : dead) alive.erase(d);
        }
        auto s = h.begin(message(70), alive);
        auto is_dead = [&](const Holder& p) {
          return !p.is_user() && std::find(dead.begin(), dead.end(), p.index) != dead.end();
        };
        bool touched = std::any_of(s.participants().begin(), s.participants().end(), is_dead);
        if (step != BeforeStart) {
          for (auto d : dead) alive.erase(d);
        }
        if (!touched) {
          h.commit_all(s);
          h.partial_all(s);
          CHECK(h.verifies(s.aggregate(*h.ledger), message(70), s.session_id()));
          ++completed;
          continue;
        }
        // Live holders answer up to the failure point; the dead ones go silent.
        if (step >= AfterNonces) {
          for (const auto& p : s.participants()) {
            if (!is_dead(p)) s.contribute_nonce(p, h.node(p).commit_nonce(h.request(s)));
          }
          CHECK(s.state() == SessionState::NonceCommitment);
        }
        if (step == DuringPartials) {
          // Dropping after the commitment round: let the session reach partial signing first.
          for (const auto& p : s.participants()) {
            if (is_dead(p)) s.contribute_nonce(p, h.node(p).commit_nonce(h.request(s)));
          }
          for (const auto& p : s.participants()) {
            if (!is_dead(p)) s.contribute_partial(p, h.node(p).sign_partial(s.session_id(), s.commitments()));
          }
          CHECK(code_of([&] { s.aggregate(*h.ledger); }) == ErrorCode::NotReady);
        }
        s.abort(AbortReason::ParticipantDropped, h.ledger.get());
        CHECK(s.abort_reason() == AbortReason::ParticipantDropped);
        CHECK_FALSE(s.signature().has_value());

        auto restarted = h.begin(message(70), alive);
        for (auto d : dead) CHECK_FALSE(restarted.is_participant(Holder::qtsp(d)));
        h.commit_all(restarted);
        h.partial_all(restarted);
        CHECK(h.verifies(restarted.aggregate(*h.ledger), message(70), restarted.session_id()));
        ++completed;
      }
    }
    CHECK(completed == 40);
    for (const auto& dead : subsets(5)) {
      if (dead.size() != 3) continue;
      std::set<std::uint32_t> alive = h.all();
      for (auto d : dead) alive.erase(d);
      CHECK(code_of([&] { h.begin(message(71), alive); }) == ErrorCode::InsufficientQuorum);
    }
  }

  TEST_CASE("t = n = 1 degenerates to a two-party signature") {
    ProtocolHarness h("schnorr-toy-v1", AccessStructure{1, 1, true}, 81);
    auto sig = h.run(message(80), {1});
    CHECK(h.ledger->entries().back().kind == ledger::EntryKind::SessionCompleted);
    auto s = h.begin(message(81), {1});
    h.commit_all(s);
    s.contribute_partial(Holder::qtsp(1), h.qtsps[0]->sign_partial(s.session_id(), s.commitments()));
    CHECK(code_of([&] { s.aggregate(*h.ledger); }) == ErrorCode::NotReady);
    CHECK(code_of([&] { h.begin(message(82), {}); }) == ErrorCode::InsufficientQuorum);
    (void)sig;
  }

  TEST_CASE("signer nodes guard their nonces") {
    ProtocolHarness h("schnorr-toy-v1", AccessStructure{2, 3, true}, 91);
    auto s = h.begin(message(90), {1, 2});
    auto req = h.request(s);
    Element first = h.qtsps[0]->commit_nonce(req);
    CHECK(h.qtsps[0]->commit_nonce(req) == first);  // retransmission
    auto changed = req;
    changed.message_hash = message(91);
    CHECK(code_of([&] { h.qtsps[0]->commit_nonce(changed); }) == ErrorCode::ProtocolViolation);
    auto stale = req;
    stale.epoch = 7;
    CHECK(code_of([&] { h.qtsps[0]->commit_nonce(stale); }) == ErrorCode::ProtocolViolation);
    CHECK(code_of([&] { h.qtsps[2]->commit_nonce(req); }) == ErrorCode::ProtocolViolation);

    s.contribute_nonce(Holder::qtsp(1), first);
    s.contribute_nonce(Holder::user(), h.user->commit_nonce(req));
    s.contribute_nonce(Holder::qtsp(2), h.qtsps[1]->commit_nonce(req));
    FieldElement z = h.qtsps[0]->sign_partial(s.session_id(), s.commitments());
    CHECK(h.qtsps[0]->sign_partial(s.session_id(), s.commitments()) == z);
    auto other = s.commitments();
    other[Holder::user()] = toy_group()->exp_generator(FieldElement(5, kToyQ));
    CHECK(code_of([&] { h.qtsps[0]->sign_partial(s.session_id(), other); }) == ErrorCode::ProtocolViolation);
    auto altered = s.commitments();
    altered[Holder::qtsp(2)] = toy_group()->exp_generator(FieldElement(5, kToyQ));
    CHECK(code_of([&] { h.qtsps[1]->sign_partial(s.session_id(), altered); }) == ErrorCode::ProtocolViolation);
    SessionId unknown{};
    CHECK(code_of([&] { h.qtsps[0]->sign_partial(unknown, s.commitments()); }) == ErrorCode::ProtocolViolation);
  }

  TEST_CASE("the user refuses nonces for sessions it did not approve") {
    ProtocolHarness h("schnorr-toy-v1", AccessStructure{2, 3, true}, 101);
    SeededRandom rng(1, "sid");
    auto s = SigningSession::start(h.result.key, h.suite, message(100), h.all(), rng);
    s.approve(Decision::Approve, h.ledger.get());  // coordinator claims approval
    CHECK(code_of([&] { h.user->commit_nonce(h.request(s)); }) == ErrorCode::ProtocolViolation);
    h.user->record_decision(s.session_id(), message(100), Decision::Deny);
    CHECK(code_of([&] { h.user->commit_nonce(h.request(s)); }) == ErrorCode::ProtocolViolation);
    auto s2 = SigningSession::start(h.result.key, h.suite, message(101), h.all(), rng);
    h.user->record_decision(s2.session_id(), message(999 % 256), Decision::Approve);
    CHECK(code_of([&] { h.user->commit_nonce(h.request(s2)); }) == ErrorCode::ProtocolViolation);
  }

  TEST_CASE("ledger failure withholds the signature") {
    auto control = std::make_shared<testing::FlakyStore::Control>();
    ProtocolHarness h("schnorr-toy-v1", AccessStructure{2, 3, true}, 111);
    h.ledger = std::make_unique<ledger::SigningLedger>("u", std::make_unique<testing::FlakyStore>(control),
                                                       ledger::fixed_clock(3));
    auto s = h.begin(message(110), h.all());
    h.commit_all(s);
    h.partial_all(s);
    control->fail = true;
    CHECK(code_of([&] { s.aggregate(*h.ledger); }) == ErrorCode::LedgerUnavailable);
    CHECK(s.state() == SessionState::Aborted);
    CHECK(s.abort_reason() == AbortReason::LedgerUnavailable);
    CHECK_FALSE(s.signature().has_value());
    CHECK(h.ledger->size() == 0);
  }

  TEST_CASE("refresh keeps the public key and invalidates old shares") {
    for (const char* suite_id : {"schnorr-toy-v1", "schnorr-prod-v1"}) {
      ProtocolHarness h(suite_id, AccessStructure{2, 3, true}, 121);
      SeededRandom rng(5, "refresh");
      auto old = h.result;
      RefreshResult r = refresh_shares(old.key, h.suite, old.user_share, old.qtsp_shares, rng);
      CHECK(r.key.epoch == 1);
      CHECK(r.key.group_public_key == old.key.group_public_key);
      for (const auto& s : subsets(3)) {
        if (s.size() != 2) continue;
        DkgResult merged{r.key, r.user_share, r.qtsp_shares};
        CHECK(reconstruct(merged, s) == reconstruct(old, s));
      }
      if (std::string(suite_id) == "schnorr-prod-v1") {
        for (std::size_t i = 0; i < 3; ++i) CHECK(r.qtsp_shares[i].secret != old.qtsp_shares[i].secret);
      }

      ProtocolHarness fresh(suite_id, DkgResult{r.key, r.user_share, r.qtsp_shares}, 122);
      Signature refreshed_sig = fresh.run(message(120), fresh.all());
      CHECK(fresh.verifies(refreshed_sig, message(120), fresh.ledger->entries().back().session_id));
      CHECK(fresh.ledger->entries().back().kind == ledger::EntryKind::SessionCompleted);

      // A QTSP answering with its epoch-0 share fails per-partial verification
      // unless the refresh happened to leave that share unchanged (toy group only).
      SeededRandom stale_rng(1, "stale");
      KeyShare stale_share = old.qtsp_shares[0];
      stale_share.epoch = 1;
      SignerNode stale(stale_share, r.key, h.suite, stale_rng);
      auto s = fresh.begin(message(122), {1, 2});
      CHECK(s.epoch() == 1);
      auto req = fresh.request(s);
      s.contribute_nonce(Holder::user(), fresh.user->commit_nonce(req));
      s.contribute_nonce(Holder::qtsp(1), stale.commit_nonce(req));
      s.contribute_nonce(Holder::qtsp(2), fresh.qtsps[1]->commit_nonce(req));
      s.contribute_partial(Holder::user(), fresh.user->sign_partial(s.session_id(), s.commitments()));
      FieldElement z_stale = stale.sign_partial(s.session_id(), s.commitments());
      if (old.qtsp_shares[0].secret != r.qtsp_shares[0].secret) {
        CHECK(code_of([&] { s.contribute_partial(Holder::qtsp(1), z_stale); }) == ErrorCode::Misbehavior);
        CHECK(s.misbehaving() == Holder::qtsp(1));
      } else {
        CHECK(std::string(suite_id) == "schnorr-toy-v1");
      }
    }
  }

  TEST_CASE("refresh aborts on public-key drift or a bad zero share") {
    auto suite = make_default_registry().resolve("schnorr-toy-v1");
    const Group& g = *suite.group;
    DkgResult d = fixture_dkg();
    auto zero = [&](std::uint32_t j, long long a1) { return make_dealing(j, toy_poly({0, a1}), g, 3); };
    std::vector<Dealing> ok = {zero(1, 4), zero(2, 6), zero(3, 1)};
    RefreshResult r = finalize_refresh(d.key, suite, d.user_share, d.qtsp_shares, ok);
    CHECK(scalar_value(r.qtsp_shares[0].secret) == oracle::mod(5 + 4 + 6 + 1, 11));
    CHECK(r.user_share.epoch == 1);

    std::vector<Dealing> drift = {zero(1, 4), make_dealing(2, toy_poly({1, 6}), g, 3), zero(3, 1)};
    try {
      finalize_refresh(d.key, suite, d.user_share, d.qtsp_shares, drift);
      FAIL("expected refresh abort");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RefreshAbort);
      CHECK(e.details() == std::vector<std::string>{"qtsp-2"});
    }
    auto tampered = ok;
    tampered[2].shares.at(1) += FieldElement(1, kToyQ);
    try {
      finalize_refresh(d.key, suite, d.user_share, d.qtsp_shares, tampered);
      FAIL("expected refresh abort");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RefreshAbort);
      CHECK(e.details() == std::vector<std::string>{"qtsp-3"});
    }
    CHECK(code_of([&] { finalize_refresh(r.key, suite, r.user_share, d.qtsp_shares, ok); }) ==
          ErrorCode::StateViolation);
    CHECK(code_of([&] { finalize_refresh(d.key, suite, d.user_share, d.qtsp_shares, {zero(1, 1)}); }) ==
          ErrorCode::RefreshAbort);
  }

  TEST_CASE("migration toy to production") {
    auto registry = make_default_registry();
    ledger::SigningLedger ledger("mig", std::make_unique<ledger::MemoryLedgerStore>(), ledger::fixed_clock(1234));
    LocalCluster cluster(registry, {{2, 3, true}, "schnorr-toy-v1", 7}, ledger);
    DistributedKey old_key = cluster.key();
    auto old_session = cluster.sign(message(130));
    REQUIRE(old_session.state() == SessionState::Completed);
    Signature old_sig = *old_session.signature();

    TransitionRecord rec = cluster.migrate("schnorr-prod-v1", cluster.all_qtsps());
    CHECK(rec.old_suite_id == "schnorr-toy-v1");
    CHECK(rec.new_suite_id == "schnorr-prod-v1");
    CHECK(rec.epoch == 1);
    CHECK(rec.timestamp == 1234);
    CHECK(cluster.key().suite_id == "schnorr-prod-v1");
    CHECK(cluster.key().epoch == 1);
    CHECK(rec.new_public_key == cluster.key().group_public_key.encoding);
    CHECK(registry.resolve("schnorr-toy-v1").status == SuiteStatus::Deprecated);

    // Three verification checks.
    CHECK(schnorr_verify(registry.resolve("schnorr-toy-v1"), old_key.group_public_key, message(130), old_sig,
                         old_session.session_id()));
    auto new_session = cluster.sign(message(131));
    REQUIRE(new_session.state() == SessionState::Completed);
    CHECK(new_session.epoch() == cluster.key().epoch);
    CHECK(schnorr_verify(registry.resolve("schnorr-prod-v1"), cluster.key().group_public_key, message(131),
                         *new_session.signature(), new_session.session_id()));
    CHECK(rec.verify(registry, old_key.group_public_key));

    auto entries = ledger.entries();
    REQUIRE(entries.size() == 4);
    CHECK(entries[1].kind == ledger::EntryKind::SessionCompleted);
    CHECK(entries[1].message_hash == rec.statement_hash());
    CHECK(entries[2].kind == ledger::EntryKind::SuiteMigrated);
    CHECK(entries[2].suite_id == "schnorr-prod-v1");
    CHECK(ledger::verify_chain(entries).ok);
    CHECK(ledger::user_audit(entries, cluster.user().approvals()).empty());

    // The deprecated suite refuses new sessions for keys still on it.
    SeededRandom rng(1, "x");
    CHECK(code_of([&] {
            SigningSession::start(old_key, registry.resolve("schnorr-toy-v1"), message(1), {1, 2, 3}, rng);
          }) == ErrorCode::SuiteRefused);
    CHECK(code_of([&] { cluster.migrate("schnorr-prod-v1", cluster.all_qtsps()); }) == ErrorCode::Parameter);
    CHECK(code_of([&] { cluster.migrate("lamport-ots-v1", cluster.all_qtsps()); }) == ErrorCode::Parameter);
  }

  TEST_CASE("migration without quorum aborts and changes nothing") {
    auto registry = make_default_registry();
    ledger::SigningLedger ledger("mig", std::make_unique<ledger::MemoryLedgerStore>(), ledger::fixed_clock(1));
    LocalCluster cluster(registry, {{3, 5, true}, "schnorr-toy-v1", 9}, ledger);
    DistributedKey before = cluster.key();
    CHECK(code_of([&] { cluster.migrate("schnorr-prod-v1", {1, 2}); }) == ErrorCode::MigrationAbort);
    CHECK(registry.resolve("schnorr-toy-v1").status == SuiteStatus::Active);
    CHECK(ledger.size() == 0);
    CHECK(cluster.key().group_public_key == before.group_public_key);
    CHECK(cluster.key().suite_id == "schnorr-toy-v1");
    CHECK(cluster.sign(message(140)).state() == SessionState::Completed);

    // A user denial of the transition statement also aborts it.
    auto deny_runner = [&](const Hash32& msg) { return cluster.sign(msg, cluster.all_qtsps(), Decision::Deny); };
    SeededRandom rng(2, "m");
    CHECK(code_of([&] { migrate_suite(registry, cluster.key(), "schnorr-prod-v1", rng, deny_runner, ledger); }) ==
          ErrorCode::MigrationAbort);
    CHECK(registry.resolve("schnorr-toy-v1").status == SuiteStatus::Active);
  }

  TEST_CASE("local cluster: refresh, epochs and nonce uniqueness") {
    auto registry = make_default_registry();
    ledger::SigningLedger ledger("c", std::make_unique<ledger::MemoryLedgerStore>(), ledger::fixed_clock(1));
    LocalCluster cluster(registry, {{3, 5, true}, "schnorr-prod-v1", 13}, ledger);
    Element pk = cluster.key().group_public_key;
    std::set<Bytes> nonces;
    std::size_t commitments = 0;
    for (int round = 0; round < 3; ++round) {
      for (std::uint8_t m = 0; m < 5; ++m) {
        auto s = cluster.sign(message(m), {1, 3, 4, 5});
        REQUIRE(s.state() == SessionState::Completed);
        CHECK(s.epoch() == cluster.key().epoch);
        for (const auto& [_, c] : s.commitments()) nonces.insert(c.encoding);
        commitments += s.commitments().size();
      }
      cluster.refresh();
      CHECK(cluster.key().group_public_key == pk);
      CHECK(cluster.key().epoch == static_cast<std::uint32_t>(round + 1));
    }
    CHECK(nonces.size() == commitments);
    auto entries = ledger.entries();
    CHECK(std::count_if(entries.begin(), entries.end(),
                        [](const auto& e) { return e.kind == ledger::EntryKind::ShareRefreshed; }) == 3);
    CHECK(ledger::verify_chain(entries).ok);
    CHECK(ledger::user_audit(entries, cluster.user().approvals()).empty());
  }
}
