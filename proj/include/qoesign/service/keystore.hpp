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

#include <string>
#include <vector>

#include "qoesign/protocol/keys.hpp"

namespace qoesign::service {

// On-disk layout under the data directory:
//   transport.key                      hex setup secret for transport and user auth keys
//   users/<id>/key.json                public DistributedKey
//   users/<id>/user_share.sealed.json  user share under a passphrase (PBKDF2 + AES-256-GCM)
//   users/<id>/auth.key                hex key the user signs approvals with
//   qtsp-<i>/<id>.share.json           QTSP i's share for that user
//   ledgers/<id>.ledger                the user's signing ledger
// Secret files are created with mode 0600 through a rename, so a crash never
// leaves a truncated file.
class KeyStore {
 public:
  static constexpr int kPbkdf2Iterations = 100000;

  explicit KeyStore(std::string data_dir);
  const std::string& data_dir() const { return dir_; }

  // Creates the secret on first use.
  Bytes transport_secret(RandomSource& rng);
  Bytes transport_secret() const;  // NotFound when absent

  bool has_user(const std::string& user_id) const;
  std::vector<std::string> users() const;

  // Trusted setup ceremony: runs the DKG for one user and writes every
  // holder's material into its slot. Duplicate when the user exists.
  protocol::DistributedKey provision_user(const std::string& user_id, const protocol::AccessStructure& access,
                                          const SignatureSuite& suite, const std::string& passphrase,
                                          RandomSource& user_rng, const std::vector<RandomSource*>& dealer_rngs,
                                          RandomSource& seal_rng);

  protocol::DistributedKey load_key(const std::string& user_id, const SuiteRegistry& registry) const;
  protocol::KeyShare load_qtsp_share(std::uint32_t index, const std::string& user_id,
                                     const SuiteRegistry& registry) const;
  // Unauthenticated on a wrong passphrase or a sealed file moved to another user.
  protocol::KeyShare unseal_user_share(const std::string& user_id, const std::string& passphrase,
                                       const SuiteRegistry& registry) const;
  Hash32 user_auth_key(const std::string& user_id) const;

  std::string ledger_path(const std::string& user_id) const;
  std::string user_dir(const std::string& user_id) const;
  std::string qtsp_dir(std::uint32_t index) const;

 private:
  std::string dir_;
};

// JSON forms of the public key record. Elements and scalars are hex.
std::string key_to_json(const protocol::DistributedKey& key, const SignatureSuite& suite);
protocol::DistributedKey key_from_json(std::string_view json_text, const SuiteRegistry& registry);

// Key the user authenticates approvals with, derived from the setup secret.
Hash32 derive_user_auth_key(ByteView transport_secret, std::string_view user_id);

}  // namespace qoesign::service
