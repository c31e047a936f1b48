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

#include "qoesign/service/config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qoesign/errors.hpp"

namespace qoesign::service {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::Config, field + ": " + msg, {field});
}

template <typename T>
T get_field(const ordered_json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(key, e.what());
  }
}

std::string listen_string(const ListenAddress& a) { return a.host + ":" + std::to_string(a.port); }

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::InProcessSim ? "in_process_sim" : "multi_process"; }

Mode parse_mode(std::string_view s) {
  if (s == "in_process_sim") return Mode::InProcessSim;
  if (s == "multi_process") return Mode::MultiProcess;
  config_error("mode", "expected in_process_sim or multi_process, got '" + std::string(s) + "'");
}

ListenAddress parse_listen(std::string_view s) {
  auto colon = s.rfind(':');
  if (colon == std::string_view::npos || colon == 0) config_error("listen", "expected host:port");
  ListenAddress a;
  a.host = std::string(s.substr(0, colon));
  auto digits = s.substr(colon + 1);
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), a.port);
  if (ec != std::errc() || p != digits.data() + digits.size() || a.port < 0 || a.port > 65535) {
    config_error("listen", "invalid port '" + std::string(digits) + "'");
  }
  return a;
}

void validate_user_id(std::string_view user_id) {
  bool ok = !user_id.empty() && user_id.size() <= 64;
  for (char c : user_id) {
    ok = ok && ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-');
  }
  if (!ok) throw Error(ErrorCode::Validation, "invalid user id '" + std::string(user_id) + "'", {"user_id"});
}

void ServiceConfig::validate() const {
  if (n < 1 || n > 16) config_error("n", "must be in 1..16");
  if (t < 1 || t > n) config_error("t", "must satisfy 1 <= t <= n");
  if (suite_id.empty()) config_error("suite_id", "must not be empty");
  if (mode == Mode::MultiProcess && peers.size() != n) {
    config_error("peers", "multi_process mode needs exactly n peer addresses, got " + std::to_string(peers.size()));
  }
  for (const auto& u : users) {
    try {
      validate_user_id(u);
    } catch (const Error& e) {
      config_error("users", e.what());
    }
  }
  if (approval_timeout_s == 0) config_error("approval_timeout_s", "must be positive");
  if (peer_timeout_ms == 0) config_error("peer_timeout_ms", "must be positive");
  if (data_dir.empty()) config_error("data_dir", "must not be empty");
  std::error_code ec;
  std::filesystem::create_directories(data_dir, ec);
  if (ec) config_error("data_dir", "cannot create '" + data_dir + "': " + ec.message());
  auto probe = std::filesystem::path(data_dir) / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok") || !out.flush()) config_error("data_dir", "'" + data_dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

std::string ServiceConfig::user_passphrase() const {
  if (passphrase) return *passphrase;
  const char* v = std::getenv(passphrase_env.c_str());
  if (v == nullptr || *v == '\0') {
    config_error("passphrase_env", "environment variable " + passphrase_env + " is not set");
  }
  return v;
}

ServiceConfig parse_config(std::string_view json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  ServiceConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "n") c.n = get_field<std::uint32_t>(j, key);
    else if (key == "t") c.t = get_field<std::uint32_t>(j, key);
    else if (key == "suite_id") c.suite_id = get_field<std::string>(j, key);
    else if (key == "listen") c.listen = parse_listen(get_field<std::string>(j, key));
    else if (key == "data_dir") c.data_dir = get_field<std::string>(j, key);
    else if (key == "mode") c.mode = parse_mode(get_field<std::string>(j, key));
    else if (key == "peers") c.peers = get_field<std::vector<std::string>>(j, key);
    else if (key == "users") c.users = get_field<std::vector<std::string>>(j, key);
    else if (key == "seed") {
      if (!value.is_null()) c.seed = get_field<std::uint64_t>(j, key);
    } else if (key == "passphrase_env") c.passphrase_env = get_field<std::string>(j, key);
    else if (key == "approval_timeout_s") c.approval_timeout_s = get_field<std::uint32_t>(j, key);
    else if (key == "peer_timeout_ms") c.peer_timeout_ms = get_field<std::uint32_t>(j, key);
    else config_error(key, "unknown field");
  }
  return c;
}

std::string serialize_config(const ServiceConfig& c) {
  ordered_json j;
  j["n"] = c.n;
  j["t"] = c.t;
  j["suite_id"] = c.suite_id;
  j["listen"] = listen_string(c.listen);
  j["data_dir"] = c.data_dir;
  j["mode"] = std::string(to_string(c.mode));
  j["peers"] = c.peers;
  j["users"] = c.users;
  j["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
  j["passphrase_env"] = c.passphrase_env;
  j["approval_timeout_s"] = c.approval_timeout_s;
  j["peer_timeout_ms"] = c.peer_timeout_ms;
  return j.dump(2) + "\n";
}

ServiceConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config file '" + path + "'", {path});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string resolve_config_path(const std::optional<std::string>& explicit_path) {
  if (explicit_path && !explicit_path->empty()) return *explicit_path;
  const char* env = std::getenv("QOESIGN_CONFIG");
  if (env != nullptr && *env != '\0') return env;
  return "qoesign.json";
}

}  // namespace qoesign::service
