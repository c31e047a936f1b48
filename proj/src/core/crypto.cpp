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

#include "qoesign/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

namespace qoesign::crypto {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

[[noreturn]] void fail(const char* what) { throw Error(ErrorCode::Io, std::string("libcrypto: ") + what); }

}  // namespace

struct Sha256::Impl {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx{EVP_MD_CTX_new()};
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx.get(), EVP_sha256(), nullptr) != 1) fail("sha256 init");
}

Sha256::~Sha256() = default;

Sha256& Sha256::update(ByteView data) {
  if (EVP_DigestUpdate(impl_->ctx.get(), data.data(), data.size()) != 1) fail("sha256 update");
  return *this;
}

Hash32 Sha256::finish() {
  Hash32 out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(impl_->ctx.get(), out.data(), &len) != 1 || len != out.size()) fail("sha256 final");
  return out;
}

Hash32 sha256(ByteView data) { return Sha256().update(data).finish(); }

Hash32 hmac_sha256(ByteView key, ByteView data) {
  Hash32 out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len) ==
      nullptr) {
    fail("hmac");
  }
  return out;
}

bool constant_time_equal(ByteView a, ByteView b) {
  if (a.size() != b.size()) return false;
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

void random_bytes(std::span<std::uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) fail("RAND_bytes");
}

Bytes pbkdf2_sha256(std::string_view passphrase, ByteView salt, int iterations, std::size_t length) {
  Bytes out(length);
  if (PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()), salt.data(),
                        static_cast<int>(salt.size()), iterations, EVP_sha256(), static_cast<int>(length),
                        out.data()) != 1) {
    fail("pbkdf2");
  }
  return out;
}

Bytes aes_gcm_seal(ByteView key, ByteView plaintext, ByteView aad, ByteView nonce) {
  if (key.size() != 32 || nonce.size() != 12) throw Error(ErrorCode::Parameter, "aes-gcm needs 32-byte key, 12-byte nonce");
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1) {
    fail("gcm init");
  }
  int len = 0;
  if (!aad.empty() && EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    fail("gcm aad");
  }
  Bytes out(nonce.begin(), nonce.end());
  out.resize(12 + plaintext.size() + 16);
  if (EVP_EncryptUpdate(ctx.get(), out.data() + 12, &len, plaintext.data(), static_cast<int>(plaintext.size())) != 1) {
    fail("gcm update");
  }
  int tail = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + 12 + len, &tail) != 1) fail("gcm final");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, 16, out.data() + 12 + plaintext.size()) != 1) {
    fail("gcm tag");
  }
  return out;
}

Bytes aes_gcm_open(ByteView key, ByteView sealed, ByteView aad) {
  if (key.size() != 32) throw Error(ErrorCode::Parameter, "aes-gcm needs a 32-byte key");
  if (sealed.size() < 28) throw Error(ErrorCode::Decode, "sealed blob too short");
  auto nonce = sealed.first(12);
  auto body = sealed.subspan(12, sealed.size() - 28);
  auto tag = sealed.last(16);
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1) {
    fail("gcm init");
  }
  int len = 0;
  if (!aad.empty() && EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    fail("gcm aad");
  }
  Bytes out(body.size());
  if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, body.data(), static_cast<int>(body.size())) != 1) {
    fail("gcm update");
  }
  Bytes tag_copy(tag.begin(), tag.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, tag_copy.data()) != 1) fail("gcm tag");
  int tail = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &tail) != 1) {
    throw Error(ErrorCode::Decode, "sealed blob failed authentication");
  }
  return out;
}

}  // namespace qoesign::crypto
