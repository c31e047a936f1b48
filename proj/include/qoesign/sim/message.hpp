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

#include "qoesign/protocol/signer.hpp"
#include "qoesign/sim/transport.hpp"

namespace qoesign::sim {

enum class MessageKind : std::uint8_t {
  Ping = 1,
  Pong = 2,
  ApprovalRequest = 3,
  ApprovalResponse = 4,
  NonceRequest = 5,
  NonceCommit = 6,
  PartialRequest = 7,
  Partial = 8,
  Junk = 9,  // flood traffic; never meaningful
};

std::string_view to_string(MessageKind k);
MessageKind parse_message_kind(std::string_view s);

// u8 version || sid 16 || u32 epoch || u32 sender || u8 kind || lp32 payload
struct ProtocolMessage {
  SessionId session_id{};
  std::uint32_t epoch = 0;
  NodeId sender = 0;
  MessageKind kind = MessageKind::Ping;
  Bytes payload;

  Bytes encode() const;
  static ProtocolMessage decode(ByteView body);  // Decode on malformed input
};

// Payload codecs. Elements and scalars use the group's canonical encodings.
Bytes encode_nonce_request(const protocol::NonceRequest& r);
protocol::NonceRequest decode_nonce_request(ByteView payload, const SessionId& sid, std::uint32_t epoch);
Bytes encode_commitments(const std::map<protocol::Holder, Element>& commitments);
std::map<protocol::Holder, Element> decode_commitments(ByteView payload, const Group& group);

}  // namespace qoesign::sim
