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

#include "qoesign/service/http.hpp"

#include <charconv>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "qoesign/errors.hpp"
#include "qoesign/threat/threat_model.hpp"

namespace qoesign::service {

using nlohmann::ordered_json;

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const ordered_json& j) {
  res.status = status;
  res.set_content(j.dump() + "\n", kJson);
}

void send_error(httplib::Response& res, const Error& e) {
  res.status = http_status(e.code());
  res.set_content(error_body(e), kJson);
}

ordered_json parse_body(const std::string& body) {
  ordered_json j;
  try {
    j = ordered_json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("request body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Validation, "request body must be a JSON object");
  return j;
}

std::string string_field(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::Validation, std::string(key) + " must be a string", {key});
  }
  return it->get<std::string>();
}

void only_keys(const ordered_json& j, std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw Error(ErrorCode::Validation, "unknown field '" + k + "'", {k});
    }
  }
}

std::uint64_t parse_seq(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::Unauthenticated, std::string(kSeqHeader) + " must be a decimal integer");
  }
  return v;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation:
    case ErrorCode::Parameter:
    case ErrorCode::Decode:
    case ErrorCode::Config:
      return 400;
    case ErrorCode::Unauthenticated:
      return 401;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::StateViolation:
    case ErrorCode::Duplicate:
    case ErrorCode::SuiteRefused:
      return 409;
    case ErrorCode::ProtocolViolation:
    case ErrorCode::Misbehavior:
      return 502;
    case ErrorCode::InsufficientQuorum:
    case ErrorCode::LedgerUnavailable:
    case ErrorCode::NotReady:
      return 503;
    default:
      return 500;
  }
}

std::string error_body(const Error& e) {
  ordered_json j;
  j["code"] = std::string(to_string(e.code()));
  j["message"] = e.what();
  j["details"] = e.details();
  return j.dump() + "\n";
}

std::string session_view_json(const SessionView& v) {
  ordered_json j;
  j["session_id"] = v.session_id;
  j["user_id"] = v.user_id;
  j["state"] = v.state;
  j["message_hash"] = v.message_hash;
  j["fingerprint"] = v.fingerprint;
  j["suite_id"] = v.suite_id;
  j["participants"] = v.participants;
  if (v.abort_reason) j["abort_reason"] = *v.abort_reason;
  if (v.signature) j["signature"] = *v.signature;
  return j.dump() + "\n";
}

// --- ApiServer --------------------------------------------------------------

struct ApiServer::Impl {
  CoordinatorService* service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(CoordinatorService& s) : service(&s) {
    // Every handler funnels errors through one JSON shape.
    auto guarded = [](auto handler) {
      return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
          handler(req, res);
        } catch (const Error& e) {
          send_error(res, e);
        } catch (const std::exception& e) {
          send_error(res, Error(ErrorCode::Io, std::string("internal error: ") + e.what()));
        }
      };
    };

    server.Get("/v1/health", guarded([this](const httplib::Request&, httplib::Response& res) {
      ordered_json j;
      j["status"] = "ok";
      j["mode"] = std::string(to_string(service->config().mode));
      j["n"] = service->config().n;
      j["t"] = service->config().t;
      send_json(res, 200, j);
    }));

    server.Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto j = parse_body(req.body);
      only_keys(j, {"user_id", "message_hash", "suite_id"});
      std::optional<std::string> suite;
      if (j.contains("suite_id") && !j["suite_id"].is_null()) suite = string_field(j, "suite_id");
      SessionView v = service->create_session(string_field(j, "user_id"), string_field(j, "message_hash"), suite);
      res.status = 201;
      res.set_content(session_view_json(v), kJson);
    }));

    server.Post(R"(/v1/sessions/([^/]+)/approval)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  std::string sid = req.matches[1];
                  std::string owner = service->session_owner(sid);
                  if (!req.has_header(kSeqHeader) || !req.has_header(kTagHeader)) {
                    throw Error(ErrorCode::Unauthenticated, "approval requires the user's request signature");
                  }
                  service->authenticate(owner, parse_seq(req.get_header_value(kSeqHeader)), req.path, req.body,
                                        req.get_header_value(kTagHeader));
                  auto j = parse_body(req.body);
                  only_keys(j, {"decision"});
                  protocol::Decision d;
                  try {
                    d = protocol::parse_decision(string_field(j, "decision"));
                  } catch (const Error&) {
                    throw Error(ErrorCode::Validation, "decision must be \"approve\" or \"deny\"", {"decision"});
                  }
                  res.status = 200;
                  res.set_content(session_view_json(service->decide(sid, d)), kJson);
                }));

    server.Get(R"(/v1/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      res.set_content(session_view_json(service->get(req.matches[1])), kJson);
    }));

    server.Get(R"(/v1/users/([^/]+)/ledger)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::string user_id = req.matches[1];
      auto entries = service->ledger_entries(user_id);
      ordered_json j;
      j["user_id"] = user_id;
      j["entries"] = ordered_json::parse(ledger::entries_to_json(entries));
      std::string verify = req.has_param("verify") ? req.get_param_value("verify") : "false";
      if (verify != "true" && verify != "false") {
        throw Error(ErrorCode::Validation, "verify must be true or false", {"verify"});
      }
      if (verify == "true") {
        auto verdict = ledger::verify_chain(entries);
        ordered_json v;
        v["ok"] = verdict.ok;
        if (!verdict.ok) {
          v["first_bad_index"] = verdict.first_bad_index;
          v["reason"] = verdict.reason;
        }
        j["verdict"] = v;
      }
      send_json(res, 200, j);
    }));

    server.Get(R"(/v1/users/([^/]+)/key)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      PublicKeyView k = service->public_key(req.matches[1]);
      ordered_json j;
      j["user_id"] = k.user_id;
      j["suite_id"] = k.suite_id;
      j["public_key"] = k.public_key;
      j["epoch"] = k.epoch;
      j["t"] = k.t;
      j["n"] = k.n;
      send_json(res, 200, j);
    }));

    server.Get("/v1/threatmodel/matrix", guarded([](const httplib::Request& req, httplib::Response& res) {
      auto param = [&](const char* key, const char* fallback) {
        return req.has_param(key) ? req.get_param_value(key) : std::string(fallback);
      };
      auto format = threat::parse_matrix_format(param("format", "csv"));
      auto rule = threat::parse_rule_mode(param("rule", "table"));
      const auto& data = threat::bundled_dataset();
      std::string body = threat::render_matrix(threat::score_model(data.model, data.entries, rule), format);
      res.set_content(body, format == threat::MatrixFormat::Csv ? "text/csv" : "text/markdown");
    }));

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) {
        send_error(res, Error(ErrorCode::NotFound, "no route for " + req.method + " " + req.path));
      } else if (res.status == 400) {
        send_error(res, Error(ErrorCode::Validation, "malformed HTTP request"));
      }
    });
  }
};

ApiServer::ApiServer(CoordinatorService& service) : impl_(std::make_unique<Impl>(service)) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ApiServer::serve(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

// --- ServiceClient ----------------------------------------------------------

struct ServiceClient::Impl {
  httplib::Client client;
  explicit Impl(const std::string& url, std::uint32_t timeout_ms) : client(url) {
    auto timeout = std::chrono::milliseconds(timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
  }

  static Response convert(const httplib::Result& r) {
    Response out;
    if (!r) {
      out.body = "service unreachable: " + httplib::to_string(r.error());
      return out;
    }
    out.status = r->status;
    out.body = r->body;
    out.content_type = r->get_header_value("Content-Type");
    return out;
  }
};

ServiceClient::ServiceClient(std::string base_url, std::uint32_t timeout_ms)
    : impl_(std::make_unique<Impl>(base_url, timeout_ms)) {}

ServiceClient::~ServiceClient() = default;

ServiceClient::Response ServiceClient::get(const std::string& path) { return Impl::convert(impl_->client.Get(path)); }

ServiceClient::Response ServiceClient::post(const std::string& path, const std::string& body,
                                            const std::map<std::string, std::string>& headers) {
  httplib::Headers h(headers.begin(), headers.end());
  return Impl::convert(impl_->client.Post(path, h, body, kJson));
}

ServiceClient::Response ServiceClient::create_session(const std::string& user_id, const std::string& message_hash_hex,
                                                      const std::optional<std::string>& suite_id) {
  ordered_json j;
  j["user_id"] = user_id;
  j["message_hash"] = message_hash_hex;
  if (suite_id) j["suite_id"] = *suite_id;
  return post("/v1/sessions", j.dump());
}

ServiceClient::Response ServiceClient::decide(const std::string& session_id, const std::string& decision,
                                              const Hash32& auth_key, std::optional<std::uint64_t> seq) {
  std::string path = "/v1/sessions/" + session_id + "/approval";
  ordered_json j;
  j["decision"] = decision;
  std::string body = j.dump();
  std::uint64_t s = seq ? *seq : wall_clock_seq_base();
  Hash32 tag = approval_tag(auth_key, s, path, body);
  return post(path, body, {{kSeqHeader, std::to_string(s)}, {kTagHeader, to_hex(tag)}});
}

ServiceClient::Response ServiceClient::get_session(const std::string& session_id) {
  return get("/v1/sessions/" + session_id);
}

ServiceClient::Response ServiceClient::ledger(const std::string& user_id, bool verify) {
  return get("/v1/users/" + user_id + "/ledger" + (verify ? "?verify=true" : ""));
}

ServiceClient::Response ServiceClient::public_key(const std::string& user_id) {
  return get("/v1/users/" + user_id + "/key");
}

ServiceClient::Response ServiceClient::matrix(const std::string& format, const std::string& rule) {
  return get("/v1/threatmodel/matrix?format=" + format + "&rule=" + rule);
}

}  // namespace qoesign::service
