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

#include "qoesign/sim/message.hpp"

#include <array>

#include "qoesign/errors.hpp"

namespace qoesign::sim {

namespace {

constexpr std::uint8_t kWireVersion = 1;

constexpr std::array<std::pair<MessageKind, std::string_view>, 9> kKindNames = {{
    {MessageKind::Ping, "ping"},
    {MessageKind::Pong, "pong"},
    {MessageKind::ApprovalRequest, "approval_request"},
    {MessageKind::ApprovalResponse, "approval_response"},
    {MessageKind::NonceRequest, "nonce_request"},
    {MessageKind::NonceCommit, "nonce_commit"},
    {MessageKind::PartialRequest, "partial_request"},
    {MessageKind::Partial, "partial"},
    {MessageKind::Junk, "junk"},
}};

void write_holder(ByteWriter& w, const protocol::Holder& h) { w.u32(h.is_user() ? 0 : h.index); }

protocol::Holder read_holder(ByteReader& r) {
  std::uint32_t v = r.u32();
  return v == 0 ? protocol::Holder::user() : protocol::Holder::qtsp(v);
}

}  // namespace

std::string_view to_string(MessageKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

MessageKind parse_message_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  throw Error(ErrorCode::Config, "unknown message kind '" + std::string(s) + "'");
}

Bytes ProtocolMessage::encode() const {
  ByteWriter w;
  w.u8(kWireVersion).raw(session_id).u32(epoch).u32(sender).u8(static_cast<std::uint8_t>(kind)).lp32(payload);
  return std::move(w).take();
}

ProtocolMessage ProtocolMessage::decode(ByteView body) {
  ByteReader r(body);
  if (r.u8() != kWireVersion) throw Error(ErrorCode::Decode, "unsupported message version");
  ProtocolMessage m;
  m.session_id = r.fixed<16>();
  m.epoch = r.u32();
  m.sender = r.u32();
  std::uint8_t k = r.u8();
  if (k < 1 || k > static_cast<std::uint8_t>(MessageKind::Junk)) throw Error(ErrorCode::Decode, "unknown message kind");
  m.kind = static_cast<MessageKind>(k);
  auto p = r.lp32();
  m.payload.assign(p.begin(), p.end());
  r.expect_end();
  return m;
}

Bytes encode_nonce_request(const protocol::NonceRequest& req) {
  ByteWriter w;
  w.raw(req.message_hash).lp8(as_bytes(req.suite_id)).u32(static_cast<std::uint32_t>(req.participants.size()));
  for (const auto& h : req.participants) write_holder(w, h);
  return std::move(w).take();
}

protocol::NonceRequest decode_nonce_request(ByteView payload, const SessionId& sid, std::uint32_t epoch) {
  ByteReader r(payload);
  protocol::NonceRequest req;
  req.session_id = sid;
  req.epoch = epoch;
  req.message_hash = r.fixed<32>();
  auto suite = r.lp8();
  req.suite_id.assign(suite.begin(), suite.end());
  std::uint32_t count = r.u32();
  if (count > 1024) throw Error(ErrorCode::Decode, "participant list too long");
  for (std::uint32_t i = 0; i < count; ++i) req.participants.push_back(read_holder(r));
  r.expect_end();
  return req;
}

Bytes encode_commitments(const std::map<protocol::Holder, Element>& commitments) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(commitments.size()));
  for (const auto& [h, e] : commitments) {
    write_holder(w, h);
    w.lp8(e.encoding);
  }
  return std::move(w).take();
}

std::map<protocol::Holder, Element> decode_commitments(ByteView payload, const Group& group) {
  ByteReader r(payload);
  std::uint32_t count = r.u32();
  if (count > 1024) throw Error(ErrorCode::Decode, "commitment list too long");
  std::map<protocol::Holder, Element> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto h = read_holder(r);
    auto e = group.decode(r.lp8());
    if (!out.emplace(h, e).second) throw Error(ErrorCode::Decode, "duplicate holder in commitment list");
  }
  r.expect_end();
  return out;
}

}  // namespace qoesign::sim
