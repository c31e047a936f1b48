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

#include "qoesign/bytes.hpp"

#include <algorithm>

namespace qoesign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation: return "validation_error";
    case ErrorCode::Parameter: return "parameter_error";
    case ErrorCode::Decode: return "decode_error";
    case ErrorCode::Reconstruction: return "reconstruction_error";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Duplicate: return "duplicate";
    case ErrorCode::NoSuiteAvailable: return "no_suite_available";
    case ErrorCode::InvalidKey: return "invalid_key";
    case ErrorCode::StateViolation: return "state_violation";
    case ErrorCode::ProtocolViolation: return "protocol_violation";
    case ErrorCode::InsufficientQuorum: return "insufficient_quorum";
    case ErrorCode::Misbehavior: return "misbehavior";
    case ErrorCode::DkgAbort: return "dkg_abort";
    case ErrorCode::RefreshAbort: return "refresh_abort";
    case ErrorCode::MigrationAbort: return "migration_abort";
    case ErrorCode::NotReady: return "not_ready";
    case ErrorCode::LedgerUnavailable: return "ledger_unavailable";
    case ErrorCode::DanglingReference: return "dangling_reference";
    case ErrorCode::ReferenceCycle: return "reference_cycle";
    case ErrorCode::SuiteRefused: return "suite_refused";
    case ErrorCode::OneTimeKeyReused: return "one_time_key_reused";
    case ErrorCode::Config: return "config_error";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Unauthenticated: return "unauthenticated";
  }
  return "unknown";
}

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::Decode, "hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::Decode, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u16(std::uint16_t v) {
  out_.push_back(static_cast<std::uint8_t>(v >> 8));
  out_.push_back(static_cast<std::uint8_t>(v));
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::raw(ByteView data) {
  out_.insert(out_.end(), data.begin(), data.end());
  return *this;
}

ByteWriter& ByteWriter::lp8(ByteView data) {
  if (data.size() > 0xff) throw Error(ErrorCode::Validation, "field exceeds 255 bytes");
  u8(static_cast<std::uint8_t>(data.size()));
  return raw(data);
}

ByteWriter& ByteWriter::lp32(ByteView data) {
  u32(static_cast<std::uint32_t>(data.size()));
  return raw(data);
}

ByteView ByteReader::raw(std::size_t n) {
  if (remaining() < n) throw Error(ErrorCode::Decode, "truncated input");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint16_t ByteReader::u16() {
  auto b = raw(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::u32() {
  auto b = raw(4);
  std::uint32_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t ByteReader::u64() {
  auto b = raw(8);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

ByteView ByteReader::lp8() { return raw(u8()); }

ByteView ByteReader::lp32() { return raw(u32()); }

void ByteReader::expect_end() const {
  if (remaining() != 0) throw Error(ErrorCode::Decode, "trailing bytes after record");
}

}  // namespace qoesign
