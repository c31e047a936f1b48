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

#include <map>
#include <string>

#include "qoesign/bytes.hpp"
#include "qoesign/protocol/keys.hpp"

namespace qoesign::sim {

// 0 is the user, 1..n are QTSPs, kCoordinator is the coordinator.
using NodeId = std::uint32_t;
inline constexpr NodeId kUserNode = 0;
inline constexpr NodeId kCoordinator = 0xFFFFFFFFu;

std::string node_name(NodeId id);  // "user", "qtsp-3", "coordinator"
NodeId parse_node(std::string_view name);
protocol::Holder holder_of(NodeId id);  // user or QTSP only
NodeId node_of(const protocol::Holder& h);

struct Envelope {
  NodeId from = 0;
  NodeId to = 0;
  std::uint64_t seq = 0;
  Bytes body;
  Hash32 auth_tag{};

  bool operator==(const Envelope&) const = default;

  // u32 from || u32 to || u64 seq || tag || lp32 body. Used where envelopes
  // cross a real network.
  Bytes encode() const;
  static Envelope decode(ByteView wire);  // Decode on malformed input
};

// Pairwise HMAC keys derived from one setup secret. The tag binds
// from || to || seq || body, so a tag cannot be replayed onto another link.
class TransportKeys {
 public:
  explicit TransportKeys(ByteView setup_secret);

  Hash32 pair_key(NodeId a, NodeId b) const;
  Hash32 tag(NodeId from, NodeId to, std::uint64_t seq, ByteView body) const;
  static Hash32 tag_with(const Hash32& key, NodeId from, NodeId to, std::uint64_t seq, ByteView body);

 private:
  Bytes secret_;
};

enum class Verdict { Accepted, BadTag, Replay };
std::string_view to_string(Verdict v);

// One endpoint's view of the transport: numbers outgoing envelopes per
// direction and accepts incoming ones iff the tag verifies and seq strictly
// increases for that sender.
class Endpoint {
 public:
  // Outgoing numbering starts after seq_base. A process that restarts picks a
  // base above anything it sent before (for example the wall clock in
  // microseconds) so peers do not read its traffic as replays.
  Endpoint(NodeId self, const TransportKeys& keys, std::uint64_t seq_base = 0)
      : self_(self), keys_(&keys), seq_base_(seq_base) {}

  NodeId id() const { return self_; }
  Envelope seal(NodeId to, Bytes body);
  // With check_auth off only replay protection applies.
  Verdict open(const Envelope& env, bool check_auth = true);

 private:
  NodeId self_;
  const TransportKeys* keys_;
  std::uint64_t seq_base_;
  std::map<NodeId, std::uint64_t> next_out_;
  std::map<NodeId, std::uint64_t> last_in_;
};

}  // namespace qoesign::sim
