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
#include <optional>
#include <string>

#include "qoesign/service/coordinator.hpp"

namespace qoesign::service {

// Status for an error code; see docs/error-codes.md.
int http_status(ErrorCode code);
// {"code": ..., "message": ..., "details": [...]}
std::string error_body(const Error& error);

std::string session_view_json(const SessionView& v);

inline constexpr const char* kSeqHeader = "X-Qoesign-Seq";
inline constexpr const char* kTagHeader = "X-Qoesign-Tag";

// HTTP/JSON front of a CoordinatorService.
class ApiServer {
 public:
  explicit ApiServer(CoordinatorService& service);
  ~ApiServer();

  // Binds (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void serve(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Client for the coordinator API, shared by the CLI and the tests.
class ServiceClient {
 public:
  struct Response {
    int status = 0;  // 0 when the service could not be reached
    std::string body;
    std::string content_type;
  };

  explicit ServiceClient(std::string base_url, std::uint32_t timeout_ms = 30000);
  ~ServiceClient();

  Response create_session(const std::string& user_id, const std::string& message_hash_hex,
                          const std::optional<std::string>& suite_id = std::nullopt);
  // Signs the request with the user's auth key. seq defaults to the wall clock.
  Response decide(const std::string& session_id, const std::string& decision, const Hash32& auth_key,
                  std::optional<std::uint64_t> seq = std::nullopt);
  Response get_session(const std::string& session_id);
  Response ledger(const std::string& user_id, bool verify = false);
  Response public_key(const std::string& user_id);
  Response matrix(const std::string& format, const std::string& rule);

  Response get(const std::string& path);
  Response post(const std::string& path, const std::string& body,
                const std::map<std::string, std::string>& headers = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qoesign::service
