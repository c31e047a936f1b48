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

#include "qoesign/service/peers.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "qoesign/errors.hpp"
#include "qoesign/sim/message.hpp"

namespace qoesign::service {

using protocol::Holder;
using protocol::NonceRequest;
using sim::MessageKind;
using sim::ProtocolMessage;

namespace {

constexpr const char* kPeerPath = "/v1/peer";
constexpr const char* kBinary = "application/octet-stream";

// Envelope body: lp8(user_id) || protocol message.
Bytes wrap(const std::string& user_id, const ProtocolMessage& m) {
  ByteWriter w;
  w.lp8(as_bytes(user_id)).raw(m.encode());
  return std::move(w).take();
}

std::pair<std::string, ProtocolMessage> unwrap(ByteView body) {
  ByteReader r(body);
  auto user = r.lp8();
  auto rest = r.raw(r.remaining());
  return {std::string(user.begin(), user.end()), ProtocolMessage::decode(rest)};
}

}  // namespace

std::uint64_t wall_clock_seq_base() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
          .count());
}

// --- QtspNode ---------------------------------------------------------------

QtspNode::QtspNode(std::uint32_t index, const KeyStore& store, const SuiteRegistry& registry,
                   std::optional<std::uint64_t> seed)
    : index_(index), store_(&store), registry_(&registry) {
  if (seed) rng_ = std::make_unique<SeededRandom>(*seed, "service/qtsp-" + std::to_string(index));
  else rng_ = std::make_unique<SystemRandom>();
}

protocol::SignerNode& QtspNode::node_for(const std::string& user_id) {
  auto it = nodes_.find(user_id);
  if (it != nodes_.end()) return *it->second;
  protocol::DistributedKey key = store_->load_key(user_id, *registry_);
  protocol::KeyShare share = store_->load_qtsp_share(index_, user_id, *registry_);
  SignatureSuite suite = registry_->resolve(key.suite_id);
  auto node = std::make_unique<protocol::SignerNode>(std::move(share), std::move(key), std::move(suite), *rng_);
  return *nodes_.emplace(user_id, std::move(node)).first->second;
}

Bytes QtspNode::commit_nonce(const std::string& user_id, const NonceRequest& request) {
  return node_for(user_id).commit_nonce(request).encoding;
}

Bytes QtspNode::sign_partial(const std::string& user_id, const SessionId& session_id,
                             const std::map<Holder, Element>& commitments) {
  auto& node = node_for(user_id);
  return node.suite().require_group().encode_scalar(node.sign_partial(session_id, commitments));
}

// --- InProcessPeers ---------------------------------------------------------

InProcessPeers::InProcessPeers(std::uint32_t n, const std::string& data_dir, std::optional<std::uint64_t> seed)
    : store_(data_dir), registry_(make_default_registry()) {
  for (std::uint32_t i = 1; i <= n; ++i) {
    auto s = std::make_unique<Slot>();
    s->node = std::make_unique<QtspNode>(i, store_, registry_, seed);
    slots_.push_back(std::move(s));
  }
}

InProcessPeers::Slot& InProcessPeers::slot(std::uint32_t qtsp) {
  if (qtsp < 1 || qtsp > slots_.size()) throw Error(ErrorCode::Parameter, "no QTSP " + std::to_string(qtsp));
  return *slots_[qtsp - 1];
}

void InProcessPeers::set_down(std::uint32_t qtsp, bool down) {
  Slot& s = slot(qtsp);
  std::lock_guard lock(s.mutex);
  s.down = down;
}

bool InProcessPeers::ping(std::uint32_t qtsp) {
  Slot& s = slot(qtsp);
  std::lock_guard lock(s.mutex);
  return !s.down;
}

Bytes InProcessPeers::commit_nonce(std::uint32_t qtsp, const std::string& user_id, const NonceRequest& request) {
  Slot& s = slot(qtsp);
  std::lock_guard lock(s.mutex);
  if (s.down) throw Error(ErrorCode::NotReady, "qtsp-" + std::to_string(qtsp) + " is unreachable");
  return s.node->commit_nonce(user_id, request);
}

Bytes InProcessPeers::sign_partial(std::uint32_t qtsp, const std::string& user_id, const SessionId& session_id,
                                   const std::map<Holder, Element>& commitments) {
  Slot& s = slot(qtsp);
  std::lock_guard lock(s.mutex);
  if (s.down) throw Error(ErrorCode::NotReady, "qtsp-" + std::to_string(qtsp) + " is unreachable");
  return s.node->sign_partial(user_id, session_id, commitments);
}

// --- HttpPeers --------------------------------------------------------------

struct HttpPeers::Impl {
  struct Peer {
    std::mutex mutex;
    std::unique_ptr<httplib::Client> client;
    std::unique_ptr<sim::Endpoint> endpoint;
  };

  sim::TransportKeys keys;
  std::vector<std::unique_ptr<Peer>> peers;

  Impl(const std::vector<std::string>& urls, const Bytes& secret, std::uint32_t timeout_ms) : keys(secret) {
    std::uint64_t base = wall_clock_seq_base();
    auto timeout = std::chrono::milliseconds(timeout_ms);
    for (const auto& url : urls) {
      auto p = std::make_unique<Peer>();
      p->client = std::make_unique<httplib::Client>(url);
      p->client->set_connection_timeout(timeout);
      p->client->set_read_timeout(timeout);
      p->client->set_write_timeout(timeout);
      p->endpoint = std::make_unique<sim::Endpoint>(sim::kCoordinator, keys, base);
      peers.push_back(std::move(p));
    }
  }

  Peer& peer(std::uint32_t qtsp) {
    if (qtsp < 1 || qtsp > peers.size()) throw Error(ErrorCode::Parameter, "no QTSP " + std::to_string(qtsp));
    return *peers[qtsp - 1];
  }

  // One authenticated round trip. The reply must come from the QTSP, answer
  // `expect`, and concern the same session.
  ProtocolMessage call(std::uint32_t qtsp, const std::string& user_id, const ProtocolMessage& request,
                       MessageKind expect) {
    Peer& p = peer(qtsp);
    std::lock_guard lock(p.mutex);
    const std::string name = "qtsp-" + std::to_string(qtsp);
    sim::Envelope env = p.endpoint->seal(qtsp, wrap(user_id, request));
    Bytes wire = env.encode();
    auto res = p.client->Post(kPeerPath, std::string(wire.begin(), wire.end()), kBinary);
    if (!res) throw Error(ErrorCode::NotReady, name + " is unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      std::string message = name + " refused the request";
      try {
        auto j = nlohmann::json::parse(res->body);
        message += ": " + j.value("message", std::string());
      } catch (const nlohmann::json::exception&) {
      }
      if (res->status >= 500) throw Error(ErrorCode::NotReady, message);
      throw Error(ErrorCode::ProtocolViolation, message, {name});
    }
    sim::Envelope reply;
    try {
      reply = sim::Envelope::decode(as_bytes(res->body));
    } catch (const Error&) {
      throw Error(ErrorCode::ProtocolViolation, name + " sent a malformed envelope", {name});
    }
    if (reply.from != qtsp || p.endpoint->open(reply) != sim::Verdict::Accepted) {
      throw Error(ErrorCode::ProtocolViolation, name + " reply failed transport authentication", {name});
    }
    auto [reply_user, m] = unwrap(reply.body);
    if (reply_user != user_id || m.kind != expect || m.session_id != request.session_id || m.sender != qtsp) {
      throw Error(ErrorCode::ProtocolViolation, name + " answered a different request", {name});
    }
    return m;
  }
};

HttpPeers::HttpPeers(std::vector<std::string> base_urls, Bytes transport_secret, std::uint32_t timeout_ms)
    : impl_(std::make_unique<Impl>(base_urls, transport_secret, timeout_ms)) {}

HttpPeers::~HttpPeers() = default;

std::uint32_t HttpPeers::size() const { return static_cast<std::uint32_t>(impl_->peers.size()); }

bool HttpPeers::ping(std::uint32_t qtsp) {
  ProtocolMessage m;
  m.sender = sim::kCoordinator;
  m.kind = MessageKind::Ping;
  try {
    impl_->call(qtsp, "", m, MessageKind::Pong);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Bytes HttpPeers::commit_nonce(std::uint32_t qtsp, const std::string& user_id, const NonceRequest& request) {
  ProtocolMessage m;
  m.session_id = request.session_id;
  m.epoch = request.epoch;
  m.sender = sim::kCoordinator;
  m.kind = MessageKind::NonceRequest;
  m.payload = sim::encode_nonce_request(request);
  return impl_->call(qtsp, user_id, m, MessageKind::NonceCommit).payload;
}

Bytes HttpPeers::sign_partial(std::uint32_t qtsp, const std::string& user_id, const SessionId& session_id,
                              const std::map<Holder, Element>& commitments) {
  ProtocolMessage m;
  m.session_id = session_id;
  m.sender = sim::kCoordinator;
  m.kind = MessageKind::PartialRequest;
  m.payload = sim::encode_commitments(commitments);
  return impl_->call(qtsp, user_id, m, MessageKind::Partial).payload;
}

// --- QtspServer -------------------------------------------------------------

struct QtspServer::Impl {
  std::uint32_t index;
  ServiceConfig config;
  KeyStore store;
  SuiteRegistry registry;
  sim::TransportKeys keys;
  sim::Endpoint endpoint;
  QtspNode node;
  std::mutex mutex;
  httplib::Server server;
  std::thread thread;

  Impl(std::uint32_t i, const ServiceConfig& c)
      : index(i),
        config(c),
        store(c.data_dir),
        registry(make_default_registry()),
        keys(store.transport_secret()),
        endpoint(i, keys, wall_clock_seq_base()),
        node(i, store, registry, c.seed) {
    if (i < 1 || i > c.n) throw Error(ErrorCode::Config, "QTSP index must be in 1..n", {"index"});
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json j{{"status", "ok"}, {"qtsp", index}};
      res.set_content(j.dump(), "application/json");
    });
    server.Post(kPeerPath, [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
  }

  void fail(httplib::Response& res, int status, const Error& e) {
    nlohmann::json j{{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", e.details()}};
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  ProtocolMessage answer(const std::string& user_id, const ProtocolMessage& m) {
    ProtocolMessage out;
    out.session_id = m.session_id;
    out.epoch = m.epoch;
    out.sender = index;
    switch (m.kind) {
      case MessageKind::Ping:
        out.kind = MessageKind::Pong;
        break;
      case MessageKind::NonceRequest: {
        out.kind = MessageKind::NonceCommit;
        out.payload = node.commit_nonce(user_id, sim::decode_nonce_request(m.payload, m.session_id, m.epoch));
        break;
      }
      case MessageKind::PartialRequest: {
        const Group& g = registry.resolve(store.load_key(user_id, registry).suite_id).require_group();
        out.kind = MessageKind::Partial;
        out.payload = node.sign_partial(user_id, m.session_id, sim::decode_commitments(m.payload, g));
        break;
      }
      default:
        throw Error(ErrorCode::ProtocolViolation, "unexpected message kind " + std::string(sim::to_string(m.kind)));
    }
    return out;
  }

  void handle(const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex);
    sim::Envelope env;
    try {
      env = sim::Envelope::decode(as_bytes(req.body));
    } catch (const Error& e) {
      return fail(res, 400, e);
    }
    if (env.from != sim::kCoordinator || endpoint.open(env) != sim::Verdict::Accepted) {
      return fail(res, 401, Error(ErrorCode::Unauthenticated, "envelope rejected by transport authentication"));
    }
    try {
      auto [user_id, m] = unwrap(env.body);
      if (!user_id.empty()) validate_user_id(user_id);
      sim::Envelope reply = endpoint.seal(sim::kCoordinator, wrap(user_id, answer(user_id, m)));
      Bytes wire = reply.encode();
      res.set_content(std::string(wire.begin(), wire.end()), kBinary);
    } catch (const Error& e) {
      fail(res, e.code() == ErrorCode::NotFound ? 404 : 422, e);
    }
  }
};

QtspServer::QtspServer(std::uint32_t index, const ServiceConfig& config)
    : impl_(std::make_unique<Impl>(index, config)) {}

QtspServer::~QtspServer() { stop(); }

int QtspServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void QtspServer::serve(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

void QtspServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace qoesign::service
