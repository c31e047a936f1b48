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
#include <shared_mutex>
#include <string>
#include <vector>

#include "qoesign/group/group.hpp"

namespace qoesign {

enum class SuiteStatus { Active, Deprecated, Experimental };
enum class SchemeKind { Schnorr, LamportOts };

std::string_view to_string(SuiteStatus s);

struct SignatureSuite {
  std::string suite_id;
  SchemeKind scheme = SchemeKind::Schnorr;
  GroupPtr group;  // null for hash-based suites
  bool threshold_capable = false;
  bool pq_claimed = false;
  SuiteStatus status = SuiteStatus::Active;

  // Fixed payload length of this suite's signatures.
  std::size_t payload_size() const;
  const Group& require_group() const;
};

// Wire format: 1-byte suite_id length || suite_id || payload.
struct Signature {
  std::string suite_id;
  Bytes payload;

  Bytes to_wire() const;
  static Signature from_wire(ByteView wire);

  bool operator==(const Signature&) const = default;
};

struct SuiteRequirement {
  std::optional<bool> threshold_capable;
  std::optional<bool> pq_claimed;
};

// Ordered registry of suites. Reads may run concurrently; registration and
// status changes take an exclusive lock. Entries are copied out, so callers
// never observe a suite changing underneath them.
class SuiteRegistry {
 public:
  SuiteRegistry() = default;
  SuiteRegistry(const SuiteRegistry& other);
  SuiteRegistry& operator=(const SuiteRegistry&) = delete;

  // Throws Duplicate for a repeated id and Validation when a
  // threshold-capable suite has no group.
  void register_suite(SignatureSuite suite);
  SignatureSuite resolve(std::string_view suite_id) const;
  std::vector<SignatureSuite> list() const;
  void set_status(std::string_view suite_id, SuiteStatus status);

  // First Active suite, in registration order, meeting every requested flag.
  std::string negotiate(const SuiteRequirement& requirement) const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<SignatureSuite> suites_;
};

// schnorr-toy-v1, schnorr-prod-v1, lamport-ots-v1 in that order.
SuiteRegistry make_default_registry();

// Throws SuiteRefused unless the suite may create new signatures.
void require_signing_allowed(const SignatureSuite& suite);

}  // namespace qoesign
