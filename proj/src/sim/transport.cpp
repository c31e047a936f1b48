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

#include "qoesign/sim/transport.hpp"

#include <charconv>

#include "qoesign/crypto.hpp"
#include "qoesign/errors.hpp"

namespace qoesign::sim {

std::string node_name(NodeId id) {
  if (id == kUserNode) return "user";
  if (id == kCoordinator) return "coordinator";
  return "qtsp-" + std::to_string(id);
}

NodeId parse_node(std::string_view name) {
  if (name == "user") return kUserNode;
  if (name == "coordinator") return kCoordinator;
  if (name.starts_with("qtsp-")) {
    std::uint32_t v = 0;
    auto digits = name.substr(5);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec == std::errc() && p == digits.data() + digits.size() && v > 0 && v != kCoordinator) return v;
  }
  throw Error(ErrorCode::Config, "unknown node '" + std::string(name) + "'");
}

protocol::Holder holder_of(NodeId id) {
  if (id == kCoordinator) throw Error(ErrorCode::Parameter, "the coordinator holds no share");
  return id == kUserNode ? protocol::Holder::user() : protocol::Holder::qtsp(id);
}

NodeId node_of(const protocol::Holder& h) { return h.is_user() ? kUserNode : h.index; }

TransportKeys::TransportKeys(ByteView setup_secret) : secret_(setup_secret.begin(), setup_secret.end()) {}

Hash32 TransportKeys::pair_key(NodeId a, NodeId b) const {
  if (a > b) std::swap(a, b);
  ByteWriter w;
  w.raw(as_bytes("QOESIGN/v1/transport")).u32(a).u32(b);
  return crypto::hmac_sha256(secret_, w.bytes());
}

Hash32 TransportKeys::tag_with(const Hash32& key, NodeId from, NodeId to, std::uint64_t seq, ByteView body) {
  ByteWriter w;
  w.u32(from).u32(to).u64(seq).raw(body);
  return crypto::hmac_sha256(key, w.bytes());
}

Hash32 TransportKeys::tag(NodeId from, NodeId to, std::uint64_t seq, ByteView body) const {
  return tag_with(pair_key(from, to), from, to, seq, body);
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Accepted: return "accepted";
    case Verdict::BadTag: return "bad-tag";
    case Verdict::Replay: return "replay";
  }
  return "?";
}

Bytes Envelope::encode() const {
  ByteWriter w;
  w.u32(from).u32(to).u64(seq).raw(auth_tag).lp32(body);
  return std::move(w).take();
}

Envelope Envelope::decode(ByteView wire) {
  ByteReader r(wire);
  Envelope env;
  env.from = r.u32();
  env.to = r.u32();
  env.seq = r.u64();
  env.auth_tag = r.fixed<32>();
  auto body = r.lp32();
  env.body.assign(body.begin(), body.end());
  r.expect_end();
  return env;
}

Envelope Endpoint::seal(NodeId to, Bytes body) {
  Envelope env;
  env.from = self_;
  env.to = to;
  env.seq = ++next_out_.try_emplace(to, seq_base_).first->second;
  env.auth_tag = keys_->tag(self_, to, env.seq, body);
  env.body = std::move(body);
  return env;
}

Verdict Endpoint::open(const Envelope& env, bool check_auth) {
  if (env.to != self_) return Verdict::BadTag;
  if (check_auth && !crypto::constant_time_equal(keys_->tag(env.from, env.to, env.seq, env.body), env.auth_tag)) {
    return Verdict::BadTag;
  }
  auto& last = last_in_[env.from];
  if (env.seq <= last) return Verdict::Replay;
  last = env.seq;
  return Verdict::Accepted;
}

}  // namespace qoesign::sim
