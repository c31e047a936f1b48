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

#include "qoesign/suite/lamport.hpp"

#include "qoesign/crypto.hpp"
#include "qoesign/suite/schnorr.hpp"

namespace qoesign {

namespace {
bool bit_at(const Hash32& digest, std::size_t i) { return (digest[i / 8] >> (7 - i % 8)) & 1; }
}  // namespace

LamportKey LamportKey::generate(RandomSource& rng) {
  LamportKey key;
  key.secrets_.resize(512);
  key.public_key_.reserve(kPublicKeySize);
  for (auto& s : key.secrets_) {
    rng.fill(s);
    Hash32 h = crypto::sha256(s);
    key.public_key_.insert(key.public_key_.end(), h.begin(), h.end());
  }
  return key;
}

Signature LamportKey::sign(const SignatureSuite& suite, const Hash32& message_hash) {
  if (suite.scheme != SchemeKind::LamportOts) throw Error(ErrorCode::Parameter, "not a lamport suite");
  require_signing_allowed(suite);
  if (used_) throw Error(ErrorCode::OneTimeKeyReused, "lamport key already signed once");
  used_ = true;
  Signature sig{suite.suite_id, {}};
  sig.payload.reserve(kSignatureSize);
  for (std::size_t i = 0; i < 256; ++i) {
    const Hash32& s = secrets_[2 * i + (bit_at(message_hash, i) ? 1 : 0)];
    sig.payload.insert(sig.payload.end(), s.begin(), s.end());
  }
  // Revealed halves stay, the unrevealed ones are no longer needed.
  for (std::size_t i = 0; i < 256; ++i) secrets_[2 * i + (bit_at(message_hash, i) ? 0 : 1)].fill(0);
  return sig;
}

bool lamport_verify(const SignatureSuite& suite, ByteView public_key, const Hash32& message_hash,
                    const Signature& signature) {
  if (signature.suite_id != suite.suite_id) return false;
  if (public_key.size() != LamportKey::kPublicKeySize) throw Error(ErrorCode::InvalidKey, "lamport public key length");
  if (signature.payload.size() != LamportKey::kSignatureSize) return false;
  ByteView payload(signature.payload);
  for (std::size_t i = 0; i < 256; ++i) {
    Hash32 h = crypto::sha256(payload.subspan(32 * i, 32));
    std::size_t slot = 2 * i + (bit_at(message_hash, i) ? 1 : 0);
    if (!crypto::constant_time_equal(h, public_key.subspan(32 * slot, 32))) return false;
  }
  return true;
}

bool verify_signature(const SuiteRegistry& registry, ByteView public_key, const Hash32& message_hash,
                      const Signature& signature, const SessionId& context) {
  SignatureSuite suite = registry.resolve(signature.suite_id);
  switch (suite.scheme) {
    case SchemeKind::Schnorr:
      return schnorr_verify(suite, suite.require_group().decode(public_key), message_hash, signature, context);
    case SchemeKind::LamportOts:
      return lamport_verify(suite, public_key, message_hash, signature);
  }
  return false;
}

}  // namespace qoesign
