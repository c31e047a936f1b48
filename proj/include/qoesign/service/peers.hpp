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
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include "qoesign/protocol/signer.hpp"
#include "qoesign/service/config.hpp"
#include "qoesign/service/keystore.hpp"

namespace qoesign::service {

// How the coordinator reaches the QTSP signer nodes. Calls for different
// QTSPs may run concurrently; calls to one QTSP are serialized.
class PeerTransport {
 public:
  virtual ~PeerTransport() = default;
  virtual std::uint32_t size() const = 0;
  // False when the QTSP does not answer in time.
  virtual bool ping(std::uint32_t qtsp) = 0;
  // Replies carry canonical encodings (commitment element, partial scalar)
  // which the caller decodes against the user's group. NotReady when
  // unreachable; the node's own error (ProtocolViolation, ...) when it refuses.
  virtual Bytes commit_nonce(std::uint32_t qtsp, const std::string& user_id,
                               const protocol::NonceRequest& request) = 0;
  virtual Bytes sign_partial(std::uint32_t qtsp, const std::string& user_id, const SessionId& session_id,
                                    const std::map<protocol::Holder, Element>& commitments) = 0;
};

// QTSP i's signer nodes, one per user, loaded lazily from its key-store slot.
class QtspNode {
 public:
  QtspNode(std::uint32_t index, const KeyStore& store, const SuiteRegistry& registry,
           std::optional<std::uint64_t> seed);

  std::uint32_t index() const { return index_; }
  Bytes commit_nonce(const std::string& user_id, const protocol::NonceRequest& request);
  Bytes sign_partial(const std::string& user_id, const SessionId& session_id,
                            const std::map<protocol::Holder, Element>& commitments);

 private:
  protocol::SignerNode& node_for(const std::string& user_id);

  std::uint32_t index_;
  const KeyStore* store_;
  const SuiteRegistry* registry_;
  std::unique_ptr<RandomSource> rng_;
  std::map<std::string, std::unique_ptr<protocol::SignerNode>> nodes_;
};

// Every QTSP lives in this process. set_down simulates an outage.
class InProcessPeers final : public PeerTransport {
 public:
  InProcessPeers(std::uint32_t n, const std::string& data_dir, std::optional<std::uint64_t> seed);

  std::uint32_t size() const override { return static_cast<std::uint32_t>(slots_.size()); }
  bool ping(std::uint32_t qtsp) override;
  Bytes commit_nonce(std::uint32_t qtsp, const std::string& user_id,
                       const protocol::NonceRequest& request) override;
  Bytes sign_partial(std::uint32_t qtsp, const std::string& user_id, const SessionId& session_id,
                            const std::map<protocol::Holder, Element>& commitments) override;
  void set_down(std::uint32_t qtsp, bool down);

 private:
  struct Slot {
    std::mutex mutex;
    std::unique_ptr<QtspNode> node;
    bool down = false;
  };
  Slot& slot(std::uint32_t qtsp);
  KeyStore store_;
  SuiteRegistry registry_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

// QTSPs in separate processes, reached over HTTP. Every request and reply
// is a transport envelope authenticated under the pairwise key.
class HttpPeers final : public PeerTransport {
 public:
  HttpPeers(std::vector<std::string> base_urls, Bytes transport_secret, std::uint32_t timeout_ms);
  ~HttpPeers() override;

  std::uint32_t size() const override;
  bool ping(std::uint32_t qtsp) override;
  Bytes commit_nonce(std::uint32_t qtsp, const std::string& user_id,
                       const protocol::NonceRequest& request) override;
  Bytes sign_partial(std::uint32_t qtsp, const std::string& user_id, const SessionId& session_id,
                            const std::map<protocol::Holder, Element>& commitments) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP front of one QTSP process: POST /v1/peer (envelopes), GET /v1/health.
class QtspServer {
 public:
  QtspServer(std::uint32_t index, const ServiceConfig& config);
  ~QtspServer();

  // Binds and serves on a background thread; returns the bound port.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void serve(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Microseconds since the epoch; the sequence base for a fresh endpoint.
std::uint64_t wall_clock_seq_base();

}  // namespace qoesign::service
