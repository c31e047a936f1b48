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

#include "qoesign/suite/suite.hpp"

#include <mutex>

#include "qoesign/suite/lamport.hpp"

namespace qoesign {

std::string_view to_string(SuiteStatus s) {
  switch (s) {
    case SuiteStatus::Active: return "active";
    case SuiteStatus::Deprecated: return "deprecated";
    case SuiteStatus::Experimental: return "experimental";
  }
  return "unknown";
}

const Group& SignatureSuite::require_group() const {
  if (!group) throw Error(ErrorCode::Parameter, "suite " + suite_id + " has no group");
  return *group;
}

std::size_t SignatureSuite::payload_size() const {
  switch (scheme) {
    case SchemeKind::Schnorr: return require_group().element_size() + require_group().scalar_size();
    case SchemeKind::LamportOts: return LamportKey::kSignatureSize;
  }
  return 0;
}

Bytes Signature::to_wire() const {
  ByteWriter w;
  w.lp8(as_bytes(suite_id)).raw(payload);
  return std::move(w).take();
}

Signature Signature::from_wire(ByteView wire) {
  ByteReader r(wire);
  auto id = r.lp8();
  if (id.empty()) throw Error(ErrorCode::Decode, "signature has an empty suite id");
  Signature sig;
  sig.suite_id.assign(id.begin(), id.end());
  auto rest = r.raw(r.remaining());
  sig.payload.assign(rest.begin(), rest.end());
  return sig;
}

SuiteRegistry::SuiteRegistry(const SuiteRegistry& other) {
  std::shared_lock lock(other.mutex_);
  suites_ = other.suites_;
}

void SuiteRegistry::register_suite(SignatureSuite suite) {
  if (suite.suite_id.empty() || suite.suite_id.size() > 255) {
    throw Error(ErrorCode::Validation, "suite id must be 1..255 bytes");
  }
  if (suite.threshold_capable && !suite.group) {
    throw Error(ErrorCode::Validation, "threshold-capable suite " + suite.suite_id + " needs a group");
  }
  if (suite.scheme == SchemeKind::Schnorr && !suite.group) {
    throw Error(ErrorCode::Validation, "schnorr suite " + suite.suite_id + " needs a group");
  }
  std::unique_lock lock(mutex_);
  for (const auto& s : suites_) {
    if (s.suite_id == suite.suite_id) throw Error(ErrorCode::Duplicate, "suite already registered: " + suite.suite_id);
  }
  suites_.push_back(std::move(suite));
}

SignatureSuite SuiteRegistry::resolve(std::string_view suite_id) const {
  std::shared_lock lock(mutex_);
  for (const auto& s : suites_) {
    if (s.suite_id == suite_id) return s;
  }
  throw Error(ErrorCode::NotFound, "unknown suite: " + std::string(suite_id));
}

std::vector<SignatureSuite> SuiteRegistry::list() const {
  std::shared_lock lock(mutex_);
  return suites_;
}

void SuiteRegistry::set_status(std::string_view suite_id, SuiteStatus status) {
  std::unique_lock lock(mutex_);
  for (auto& s : suites_) {
    if (s.suite_id == suite_id) {
      s.status = status;
      return;
    }
  }
  throw Error(ErrorCode::NotFound, "unknown suite: " + std::string(suite_id));
}

std::string SuiteRegistry::negotiate(const SuiteRequirement& requirement) const {
  std::shared_lock lock(mutex_);
  for (const auto& s : suites_) {
    if (s.status != SuiteStatus::Active) continue;
    if (requirement.threshold_capable && s.threshold_capable != *requirement.threshold_capable) continue;
    if (requirement.pq_claimed && s.pq_claimed != *requirement.pq_claimed) continue;
    return s.suite_id;
  }
  std::vector<std::string> unmet{"status=active"};
  if (requirement.threshold_capable) unmet.push_back(std::string("threshold_capable=") + (*requirement.threshold_capable ? "true" : "false"));
  if (requirement.pq_claimed) unmet.push_back(std::string("pq_claimed=") + (*requirement.pq_claimed ? "true" : "false"));
  throw Error(ErrorCode::NoSuiteAvailable, "no registered suite satisfies the requirement", unmet);
}

SuiteRegistry make_default_registry() {
  SuiteRegistry registry;
  registry.register_suite({"schnorr-toy-v1", SchemeKind::Schnorr, toy_group(), true, false, SuiteStatus::Active});
  registry.register_suite({"schnorr-prod-v1", SchemeKind::Schnorr, p256_group(), true, false, SuiteStatus::Active});
  registry.register_suite({"lamport-ots-v1", SchemeKind::LamportOts, nullptr, false, true, SuiteStatus::Experimental});
  return registry;
}

void require_signing_allowed(const SignatureSuite& suite) {
  if (suite.status == SuiteStatus::Deprecated) {
    throw Error(ErrorCode::SuiteRefused, "suite " + suite.suite_id + " is deprecated and refuses new signatures");
  }
}

}  // namespace qoesign
