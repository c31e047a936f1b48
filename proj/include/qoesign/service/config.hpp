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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qoesign::service {

enum class Mode { InProcessSim, MultiProcess };
std::string_view to_string(Mode m);  // "in_process_sim", "multi_process"
Mode parse_mode(std::string_view s);

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8700;  // 0 picks a free port
};
ListenAddress parse_listen(std::string_view s);  // "host:port"

struct ServiceConfig {
  std::uint32_t n = 3;
  std::uint32_t t = 2;
  std::string suite_id = "schnorr-prod-v1";
  ListenAddress listen;
  std::string data_dir = "qoesign-data";
  Mode mode = Mode::InProcessSim;
  std::vector<std::string> peers;  // base URL of QTSP i at position i-1 (MultiProcess)
  std::vector<std::string> users;  // provisioned at startup when missing
  std::optional<std::uint64_t> seed;  // deterministic keys and nonces; tests and demos only
  std::string passphrase_env = "QOESIGN_USER_PASSPHRASE";
  std::uint32_t approval_timeout_s = 300;
  std::uint32_t peer_timeout_ms = 2000;

  // Runtime-only: overrides passphrase_env. Never read from or written to a file.
  std::optional<std::string> passphrase;

  // Throws Config naming the field. Creates data_dir and probes that it is
  // writable.
  void validate() const;
  // Reads the passphrase from the override or the environment; Config if unset.
  std::string user_passphrase() const;
};

ServiceConfig parse_config(std::string_view json_text);
std::string serialize_config(const ServiceConfig& config);
ServiceConfig load_config_file(const std::string& path);

// Explicit path, else $QOESIGN_CONFIG, else "qoesign.json".
std::string resolve_config_path(const std::optional<std::string>& explicit_path);

// [a-z0-9_-]{1,64}; throws Validation otherwise.
void validate_user_id(std::string_view user_id);

}  // namespace qoesign::service
