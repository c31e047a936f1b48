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

#include "qoesign/bytes.hpp"

// Thin wrappers over libcrypto primitives used throughout the project.
namespace qoesign::crypto {

Hash32 sha256(ByteView data);

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(ByteView data);
  Hash32 finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Hash32 hmac_sha256(ByteView key, ByteView data);

bool constant_time_equal(ByteView a, ByteView b);

void random_bytes(std::span<std::uint8_t> out);

Bytes pbkdf2_sha256(std::string_view passphrase, ByteView salt, int iterations, std::size_t length);

// AES-256-GCM. Output layout: 12-byte nonce || ciphertext || 16-byte tag.
Bytes aes_gcm_seal(ByteView key, ByteView plaintext, ByteView aad, ByteView nonce);
// Throws ErrorCode::Decode when authentication fails.
Bytes aes_gcm_open(ByteView key, ByteView sealed, ByteView aad);

}  // namespace qoesign::crypto
