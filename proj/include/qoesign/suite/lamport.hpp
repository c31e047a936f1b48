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

#include "qoesign/random.hpp"
#include "qoesign/suite/suite.hpp"

namespace qoesign {

// Lamport one-time signatures over SHA-256, signing a 256-bit digest.
// Public key: 512 x 32-byte hashes. Signature payload: 256 x 32 bytes.
class LamportKey {
 public:
  static constexpr std::size_t kPublicKeySize = 512 * 32;
  static constexpr std::size_t kSignatureSize = 256 * 32;

  static LamportKey generate(RandomSource& rng);

  const Bytes& public_key() const { return public_key_; }
  bool used() const { return used_; }

  // Throws OneTimeKeyReused on the second call.
  Signature sign(const SignatureSuite& suite, const Hash32& message_hash);

 private:
  std::vector<Hash32> secrets_;  // [bit][value] flattened, 512 entries
  Bytes public_key_;
  bool used_ = false;
};

bool lamport_verify(const SignatureSuite& suite, ByteView public_key, const Hash32& message_hash,
                    const Signature& signature);

// Resolves the suite fresh from `registry` and dispatches to the scheme.
// `public_key` is the group encoding (Schnorr) or raw key bytes (Lamport).
bool verify_signature(const SuiteRegistry& registry, ByteView public_key, const Hash32& message_hash,
                      const Signature& signature, const SessionId& context);

}  // namespace qoesign
