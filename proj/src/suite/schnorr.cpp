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

#include "qoesign/suite/schnorr.hpp"

#include "qoesign/crypto.hpp"

namespace qoesign {

Signature encode_schnorr(const SignatureSuite& suite, const SchnorrParts& parts) {
  const Group& g = suite.require_group();
  Signature sig{suite.suite_id, {}};
  sig.payload = g.encode(parts.commitment);
  Bytes z = g.encode_scalar(parts.response);
  sig.payload.insert(sig.payload.end(), z.begin(), z.end());
  return sig;
}

SchnorrParts decode_schnorr(const SignatureSuite& suite, const Signature& signature) {
  const Group& g = suite.require_group();
  if (signature.suite_id != suite.suite_id) throw Error(ErrorCode::Decode, "signature belongs to another suite");
  if (signature.payload.size() != suite.payload_size()) throw Error(ErrorCode::Decode, "signature payload length");
  ByteView payload(signature.payload);
  return {g.decode(payload.first(g.element_size())), g.decode_scalar(payload.subspan(g.element_size()))};
}

FieldElement schnorr_challenge(const SignatureSuite& suite, const SessionId& context, const Element& commitment,
                               const Element& public_key, const Hash32& message_hash) {
  const Group& g = suite.require_group();
  // Round-trip through decode to reject non-canonical inputs.
  g.decode(commitment.encoding);
  g.decode(public_key.encoding);
  ByteWriter w;
  w.raw(as_bytes(kChallengeDomain))
      .lp8(as_bytes(suite.suite_id))
      .raw(context)
      .raw(commitment.encoding)
      .raw(public_key.encoding)
      .raw(message_hash);
  Hash32 digest = crypto::sha256(w.bytes());
  return {big_from_be(digest), g.order()};
}

FieldElement schnorr_response(const FieldElement& nonce, const FieldElement& challenge, const FieldElement& secret) {
  return nonce + challenge * secret;
}

bool schnorr_equation_holds(const Group& group, const Element& public_key, const Element& commitment,
                            const FieldElement& response, const FieldElement& challenge) {
  return group.exp_generator(response) == group.op(commitment, group.exp(public_key, challenge));
}

Signature schnorr_sign(const SignatureSuite& suite, const FieldElement& secret_key, const Hash32& message_hash,
                       const FieldElement& nonce, const SessionId& context) {
  const Group& g = suite.require_group();
  if (secret_key.is_zero()) throw Error(ErrorCode::Parameter, "secret key must be nonzero");
  if (nonce.is_zero()) throw Error(ErrorCode::Parameter, "nonce must be nonzero");
  Element pk = g.exp_generator(secret_key);
  Element r = g.exp_generator(nonce);
  FieldElement c = schnorr_challenge(suite, context, r, pk, message_hash);
  return encode_schnorr(suite, {r, schnorr_response(nonce, c, secret_key)});
}

bool schnorr_verify(const SignatureSuite& suite, const Element& public_key, const Hash32& message_hash,
                    const Signature& signature, const SessionId& context) {
  const Group& g = suite.require_group();
  g.decode(public_key.encoding);
  if (g.is_identity(public_key)) throw Error(ErrorCode::InvalidKey, "public key is the identity element");
  SchnorrParts parts;
  try {
    parts = decode_schnorr(suite, signature);
  } catch (const Error&) {
    return false;
  }
  FieldElement c = schnorr_challenge(suite, context, parts.commitment, public_key, message_hash);
  return schnorr_equation_holds(g, public_key, parts.commitment, parts.response, c);
}

}  // namespace qoesign
