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

#include "qoesign/suite/suite.hpp"

namespace qoesign {

inline constexpr std::string_view kChallengeDomain = "QOESIGN/v1/chal";

struct SchnorrParts {
  Element commitment;  // R
  FieldElement response;  // z
};

Signature encode_schnorr(const SignatureSuite& suite, const SchnorrParts& parts);
// Throws Decode on a malformed or foreign payload.
SchnorrParts decode_schnorr(const SignatureSuite& suite, const Signature& signature);

// SHA-256("QOESIGN/v1/chal" || lp8(suite_id) || context || enc(R) || enc(PK) || msg) mod q.
FieldElement schnorr_challenge(const SignatureSuite& suite, const SessionId& context, const Element& commitment,
                               const Element& public_key, const Hash32& message_hash);

// z = nonce + c * secret.
FieldElement schnorr_response(const FieldElement& nonce, const FieldElement& challenge, const FieldElement& secret);

// g^z == R * pk^c
bool schnorr_equation_holds(const Group& group, const Element& public_key, const Element& commitment,
                            const FieldElement& response, const FieldElement& challenge);

Signature schnorr_sign(const SignatureSuite& suite, const FieldElement& secret_key, const Hash32& message_hash,
                       const FieldElement& nonce, const SessionId& context);

// Throws InvalidKey for the identity public key; false for any other failure.
bool schnorr_verify(const SignatureSuite& suite, const Element& public_key, const Hash32& message_hash,
                    const Signature& signature, const SessionId& context);

}  // namespace qoesign
