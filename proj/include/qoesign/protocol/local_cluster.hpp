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
#include <optional>

#include "qoesign/protocol/migration.hpp"
#include "qoesign/protocol/signer.hpp"

namespace qoesign::protocol {

// User plus n QTSP signer nodes in one process, driven synchronously. Used
// by the in-process service mode, the benchmark and tests; the simulator
// drives the same nodes through messages instead.
class LocalCluster {
 public:
  struct Options {
    AccessStructure access;
    std::string suite_id;
    std::optional<std::uint64_t> seed;  // SeededRandom per node when set, SystemRandom otherwise
  };

  LocalCluster(SuiteRegistry& registry, Options options, ledger::SigningLedger& ledger);

  const DistributedKey& key() const { return key_; }
  SignatureSuite suite() const { return registry_->resolve(key_.suite_id); }
  UserSigner& user() { return *user_; }
  SignerNode& qtsp(std::uint32_t index) { return *qtsps_.at(index - 1); }
  ledger::SigningLedger& ledger() { return *ledger_; }

  // Runs one session to a terminal state. Only QTSPs in `responsive` take
  // part; quorum failure surfaces as Error(InsufficientQuorum).
  SigningSession sign(const Hash32& message_hash, const std::set<std::uint32_t>& responsive,
                      Decision decision = Decision::Approve);
  SigningSession sign(const Hash32& message_hash) { return sign(message_hash, all_qtsps()); }

  void refresh();
  TransitionRecord migrate(const std::string& target_suite_id, const std::set<std::uint32_t>& responsive);

  std::set<std::uint32_t> all_qtsps() const;

 private:
  RandomSource& rng_for(const std::string& label);

  SuiteRegistry* registry_;
  ledger::SigningLedger* ledger_;
  std::optional<std::uint64_t> seed_;
  std::map<std::string, std::unique_ptr<RandomSource>> rngs_;
  DistributedKey key_;
  std::unique_ptr<UserSigner> user_;
  std::vector<std::unique_ptr<SignerNode>> qtsps_;
};

}  // namespace qoesign::protocol
