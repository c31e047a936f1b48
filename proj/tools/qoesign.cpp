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

// qoesign: demos, scenario runs, benchmarks, threat-matrix rendering, offline
// verification, and the coordinator and QTSP server processes.

#include <signal.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "qoesign/crypto.hpp"
#include "qoesign/service/bench.hpp"
#include "qoesign/service/http.hpp"
#include "qoesign/sim/simulation.hpp"
#include "qoesign/suite/lamport.hpp"
#include "qoesign/threat/threat_model.hpp"

using namespace qoesign;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

bool g_json = false;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation:
    case ErrorCode::Parameter:
    case ErrorCode::Config:
    case ErrorCode::DanglingReference:
    case ErrorCode::ReferenceCycle:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

int report_error(const Error& e) {
  if (g_json) {
    ordered_json j;
    j["ok"] = false;
    j["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", e.details()}};
    std::cout << j.dump() << "\n";
  } else {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
  }
  return exit_code_for(e.code());
}

void emit(const ordered_json& j, const std::string& text) {
  if (g_json) std::cout << j.dump() << "\n";
  else std::cout << text;
}

service::ServiceConfig load_config(const std::string& flag) {
  return service::load_config_file(service::resolve_config_path(flag.empty() ? std::nullopt : std::optional(flag)));
}

// Blocks SIGINT/SIGTERM in every thread and stops `stop` when one arrives.
template <typename Stop>
std::thread stop_on_signal(Stop stop) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return std::thread([set, stop]() mutable {
    int sig = 0;
    sigwait(&set, &sig);
    stop();
  });
}

bool ask_user(const service::SessionView& v, std::istream& in, std::ostream& out) {
  out << "Signature request for user " << v.user_id << "\n"
      << "  suite:        " << v.suite_id << "\n"
      << "  QTSPs:        ";
  for (std::size_t i = 0; i < v.participants.size(); ++i) out << (i ? ", " : "") << "qtsp-" << v.participants[i];
  out << "\n  fingerprint:  " << v.fingerprint << "\n"
      << "Compare the fingerprint with the document you expect to sign.\n";
  for (;;) {
    out << "Approve? [y/n] " << std::flush;
    std::string line;
    if (!std::getline(in, line)) return false;  // closed input never approves
    if (line == "y" || line == "yes") return true;
    if (line == "n" || line == "no") return false;
  }
}

service::SessionView parse_view(const std::string& body) {
  auto j = ordered_json::parse(body);
  service::SessionView v;
  v.session_id = j.at("session_id");
  v.user_id = j.at("user_id");
  v.state = j.at("state");
  v.message_hash = j.at("message_hash");
  v.fingerprint = j.at("fingerprint");
  v.suite_id = j.at("suite_id");
  v.participants = j.at("participants").get<std::vector<std::uint32_t>>();
  if (j.contains("abort_reason")) v.abort_reason = j["abort_reason"].get<std::string>();
  if (j.contains("signature")) v.signature = j["signature"].get<std::string>();
  return v;
}

// Turns an HTTP error response back into an Error.
[[noreturn]] void throw_response(const service::ServiceClient::Response& r) {
  if (r.status == 0) throw Error(ErrorCode::Io, r.body);
  ErrorCode code = ErrorCode::Io;
  std::string message = "HTTP " + std::to_string(r.status);
  try {
    auto j = ordered_json::parse(r.body);
    message = j.value("message", message);
    std::string name = j.value("code", std::string());
    for (int c = 0; c <= static_cast<int>(ErrorCode::Unauthenticated); ++c) {
      if (to_string(static_cast<ErrorCode>(c)) == name) code = static_cast<ErrorCode>(c);
    }
  } catch (const nlohmann::json::exception&) {
  }
  throw Error(code, message);
}

service::SessionView expect_view(const service::ServiceClient::Response& r, int status) {
  if (r.status != status) throw_response(r);
  return parse_view(r.body);
}

Hash32 read_auth_key(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read auth key file '" + path + "'", {path});
  std::string text;
  in >> text;
  return fixed_from_hex<32>(text);
}

std::string verify_command(const std::string& pk, const std::string& suite, const std::string& msg,
                           const std::string& sig, const std::string& context) {
  return "qoesign verify --pk " + pk + " --suite " + suite + " --msg-hash " + msg + " --sig " + sig +
         " --context " + context;
}

// --- demo -------------------------------------------------------------------

struct DemoArgs {
  std::uint32_t n = 5;
  std::uint32_t t = 3;
  std::string suite = "schnorr-prod-v1";
  bool interactive = false;
  std::string message = "qoesign demo document";
  std::optional<std::uint64_t> seed;
  std::string data_dir;
};

int run_demo(const DemoArgs& a) {
  std::optional<fs::path> scratch;
  service::ServiceConfig c;
  c.n = a.n;
  c.t = a.t;
  c.suite_id = a.suite;
  c.users = {"demo-user"};
  c.seed = a.seed;
  if (a.data_dir.empty()) {
    scratch = fs::temp_directory_path() /
              ("qoesign-demo-" + std::to_string(::getpid()) + "-" + std::to_string(service::wall_clock_seq_base()));
    c.data_dir = scratch->string();
  } else {
    c.data_dir = a.data_dir;
  }
  Bytes pass(16);
  crypto::random_bytes(pass);
  c.passphrase = to_hex(pass);

  struct Cleanup {
    std::optional<fs::path> dir;
    ~Cleanup() {
      std::error_code ec;
      if (dir) fs::remove_all(*dir, ec);
    }
  } cleanup{scratch};

  auto svc = service::CoordinatorService::open(c);
  service::ApiServer server(*svc);
  int port = server.start("127.0.0.1", 0);
  service::ServiceClient client("http://127.0.0.1:" + std::to_string(port));

  Hash32 msg = crypto::sha256(as_bytes(a.message));
  auto created = expect_view(client.create_session("demo-user", to_hex(msg)), 201);
  bool approve = true;
  if (a.interactive) approve = ask_user(created, std::cin, g_json ? std::cerr : std::cout);
  Hash32 auth = service::KeyStore(c.data_dir).user_auth_key("demo-user");
  expect_view(client.decide(created.session_id, approve ? "approve" : "deny", auth), 200);
  auto done = expect_view(client.get_session(created.session_id), 200);
  auto key = ordered_json::parse(client.public_key("demo-user").body);
  std::string pk = key.at("public_key");

  ordered_json j;
  j["ok"] = done.state == "completed";
  j["n"] = a.n;
  j["t"] = a.t;
  j["suite_id"] = done.suite_id;
  j["state"] = done.state;
  if (done.abort_reason) j["abort_reason"] = *done.abort_reason;
  j["participants"] = done.participants;
  j["public_key"] = pk;
  j["message_hash"] = done.message_hash;
  j["session_id"] = done.session_id;
  if (done.signature) j["signature"] = *done.signature;
  auto ledger = ordered_json::parse(client.ledger("demo-user", true).body);
  j["ledger_entries"] = ledger["entries"].size();
  j["ledger_ok"] = ledger["verdict"]["ok"];

  std::string text = "state:        " + done.state + (done.abort_reason ? " (" + *done.abort_reason + ")" : "") +
                     "\nsuite:        " + done.suite_id + "\npublic key:   " + pk +
                     "\nmessage hash: " + done.message_hash + "\nsession id:   " + done.session_id + "\n";
  if (done.signature) {
    text += "signature:    " + *done.signature + "\n\nverify offline with:\n  " +
            verify_command(pk, done.suite_id, done.message_hash, *done.signature, done.session_id) + "\n";
  }
  emit(j, text);
  server.stop();
  return done.state == "completed" ? kExitOk : kExitFailure;
}

// --- scenario ---------------------------------------------------------------

int run_scenario_cmd(const std::string& target, std::optional<std::uint64_t> seed, const std::string& transcript_out) {
  sim::ScenarioConfig config = sim::resolve_scenario(target);
  if (seed) config.seed = *seed;
  sim::Transcript t = sim::run_scenario(config);
  if (!transcript_out.empty()) {
    std::ofstream out(transcript_out);
    if (!out) throw Error(ErrorCode::Config, "cannot write '" + transcript_out + "'", {transcript_out});
    out << t.to_json() << "\n";
  }
  ordered_json j;
  j["ok"] = t.matched;
  j["scenario"] = t.scenario;
  j["seed"] = t.seed;
  j["outcome"] = t.outcome.describe();
  j["expected_outcome"] = t.expected.describe();
  j["matched"] = t.matched;
  j["mismatches"] = t.mismatches;
  j["digest"] = to_hex(t.digest());
  std::string text = "scenario: " + t.scenario + " (seed " + std::to_string(t.seed) + ")\noutcome:  " +
                     t.outcome.describe() + "\nexpected: " + t.expected.describe() + "\n";
  for (const auto& m : t.mismatches) text += "mismatch: " + m + "\n";
  text += std::string(t.matched ? "MATCH" : "MISMATCH") + "\ndigest:   " + to_hex(t.digest()) + "\n";
  emit(j, text);
  return t.matched ? kExitOk : kExitFailure;
}

int list_scenarios() {
  ordered_json arr = ordered_json::array();
  std::string text;
  for (const auto& s : sim::bundled_scenarios()) {
    arr.push_back({{"name", s.name}, {"expected_outcome", s.expected_outcome.describe()}, {"description", s.description}});
    text += s.name + std::string(s.name.size() < 24 ? 24 - s.name.size() : 1, ' ') + s.expected_outcome.describe() +
            "\n";
  }
  emit(arr, text);
  return kExitOk;
}

// --- threat -----------------------------------------------------------------

int render_threats(const std::string& input, const std::string& rule, const std::string& format) {
  threat::ThreatDataset data = input.empty() ? threat::bundled_dataset() : threat::load_dataset_file(input);
  auto mode = threat::parse_rule_mode(rule);
  auto fmt = threat::parse_matrix_format(format);
  std::string rendered = threat::render_matrix(threat::score_model(data.model, data.entries, mode), fmt);
  ordered_json j;
  j["ok"] = true;
  j["rule"] = rule;
  j["format"] = format;
  j["matrix"] = rendered;
  emit(j, rendered);
  return kExitOk;
}

// --- verify -----------------------------------------------------------------

int verify_cmd(const std::string& pk_hex, const std::string& suite_id, const std::string& msg_hex,
               const std::string& sig_hex, const std::string& context_hex) {
  Bytes pk;
  Hash32 msg{};
  SessionId context{};
  Bytes sig_bytes;
  try {
    pk = from_hex(pk_hex);
    msg = fixed_from_hex<32>(msg_hex);
    sig_bytes = from_hex(sig_hex);
    if (!context_hex.empty()) context = fixed_from_hex<16>(context_hex);
  } catch (const Error& e) {
    throw Error(ErrorCode::Validation, std::string("malformed argument: ") + e.what());
  }
  SuiteRegistry registry = make_default_registry();
  registry.resolve(suite_id);  // NotFound for unknown suites
  // Accept the wire form (suite prefix + payload) or a bare payload.
  Signature sig{suite_id, sig_bytes};
  try {
    Signature wire = Signature::from_wire(sig_bytes);
    if (wire.suite_id == suite_id) sig = wire;
  } catch (const Error&) {
  }
  bool ok = false;
  std::string reason;
  try {
    ok = verify_signature(registry, pk, msg, sig, context);
    if (!ok) reason = "signature does not verify";
  } catch (const Error& e) {
    reason = std::string(to_string(e.code())) + ": " + e.what();
  }
  ordered_json j;
  j["ok"] = ok;
  j["valid"] = ok;
  j["suite_id"] = suite_id;
  if (!ok) j["reason"] = reason;
  emit(j, ok ? std::string("valid\n") : "invalid: " + reason + "\n");
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed qualified electronic signatures: demo, simulation, threat model and service"};
  app.require_subcommand(1);
  std::string output = "text";
  app.add_option("--output", output, "Output format")->check(CLI::IsMember({"text", "json"}));

  // demo
  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("demo", "Run one signing session end to end in this process");
  demo_cmd->add_option("--n", demo.n, "Number of QTSPs")->check(CLI::Range(1, 16));
  demo_cmd->add_option("--t", demo.t, "QTSP threshold")->check(CLI::Range(1, 16));
  demo_cmd->add_option("--suite", demo.suite, "Signature suite id");
  demo_cmd->add_flag("--interactive", demo.interactive, "Ask for approval at the terminal");
  demo_cmd->add_option("--message", demo.message, "Document text to sign (its SHA-256 is signed)");
  demo_cmd->add_option("--seed", demo.seed, "Deterministic keys and nonces");
  demo_cmd->add_option("--data-dir", demo.data_dir, "Keep key material and ledger here instead of a scratch dir");

  // scenario
  auto* scenario_cmd = app.add_subcommand("scenario", "Simulated network scenarios");
  scenario_cmd->require_subcommand(1);
  std::string scenario_target, transcript_out;
  std::optional<std::uint64_t> scenario_seed;
  auto* scenario_run = scenario_cmd->add_subcommand("run", "Run a bundled scenario or a scenario file");
  scenario_run->add_option("scenario", scenario_target, "Bundled name or path")->required();
  scenario_run->add_option("--seed", scenario_seed, "Override the scenario seed");
  scenario_run->add_option("--transcript", transcript_out, "Write the full transcript JSON here");
  auto* scenario_list = scenario_cmd->add_subcommand("list", "List the bundled corpus");

  // threat
  auto* threat_cmd = app.add_subcommand("threat", "Threat model");
  threat_cmd->require_subcommand(1);
  std::string threat_input, threat_rule = "table", threat_format = "csv";
  auto* threat_render = threat_cmd->add_subcommand("render", "Score and render the threat matrix");
  threat_render->add_option("--input", threat_input, "Dataset JSON (default: bundled dataset)");
  threat_render->add_option("--rule", threat_rule, "Scoring rule")->check(CLI::IsMember({"table", "stated"}));
  threat_render->add_option("--format", threat_format, "Output format")->check(CLI::IsMember({"csv", "markdown"}));

  // bench
  std::string n_range = "3..7", bench_t = "majority", bench_suite = "schnorr-prod-v1";
  std::uint32_t iterations = 10;
  std::uint64_t bench_seed = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Median session latency per number of QTSPs");
  bench_cmd->add_option("--n-range", n_range, "lo..hi");
  bench_cmd->add_option("--t", bench_t, "Threshold: majority or a number");
  bench_cmd->add_option("--iterations", iterations, "Sessions per n")->check(CLI::Range(1, 100000));
  bench_cmd->add_option("--suite", bench_suite, "Signature suite id");
  bench_cmd->add_option("--seed", bench_seed, "Key and nonce seed");

  // verify
  std::string v_pk, v_suite, v_msg, v_sig, v_context;
  auto* verify = app.add_subcommand("verify", "Verify a signature offline");
  verify->add_option("--pk", v_pk, "Public key hex")->required();
  verify->add_option("--suite", v_suite, "Suite id")->required();
  verify->add_option("--msg-hash", v_msg, "SHA-256 of the document, hex")->required();
  verify->add_option("--sig", v_sig, "Signature hex (wire form or bare payload)")->required();
  verify->add_option("--context", v_context, "Signing context hex (the session id)");

  // keygen / serve
  std::string config_path;
  auto* keygen = app.add_subcommand("keygen", "Provision key material for every configured user");
  keygen->add_option("--config", config_path, "Config file (default: $QOESIGN_CONFIG, then qoesign.json)");
  auto* serve = app.add_subcommand("serve", "Run the coordinator HTTP service");
  serve->add_option("--config", config_path, "Config file (default: $QOESIGN_CONFIG, then qoesign.json)");

  // qtsp serve
  auto* qtsp_cmd = app.add_subcommand("qtsp", "QTSP signer process");
  qtsp_cmd->require_subcommand(1);
  std::uint32_t qtsp_index = 0;
  std::string qtsp_listen;
  auto* qtsp_serve = qtsp_cmd->add_subcommand("serve", "Serve QTSP i's shares to the coordinator");
  qtsp_serve->add_option("--config", config_path, "Config file (default: $QOESIGN_CONFIG, then qoesign.json)");
  qtsp_serve->add_option("--index", qtsp_index, "QTSP index, 1..n")->required();
  qtsp_serve->add_option("--listen", qtsp_listen, "host:port (default: the index's peer address)");

  // session: the user's side of the HTTP API
  auto* session_cmd = app.add_subcommand("session", "Client for a running coordinator");
  session_cmd->require_subcommand(1);
  std::string url = "http://127.0.0.1:8700", s_user, s_msg, s_id, s_decision, s_auth;
  bool s_interactive = false;
  auto* s_create = session_cmd->add_subcommand("create", "Request a signature");
  s_create->add_option("--url", url, "Coordinator base URL");
  s_create->add_option("--user", s_user, "User id")->required();
  s_create->add_option("--msg-hash", s_msg, "SHA-256 of the document, hex")->required();
  auto* s_decide = session_cmd->add_subcommand("decide", "Approve or deny as the user");
  s_decide->add_option("--url", url, "Coordinator base URL");
  s_decide->add_option("--id", s_id, "Session id")->required();
  s_decide->add_option("--auth-key", s_auth, "User auth key file")->required();
  auto* decision_opt = s_decide->add_option("--decision", s_decision, "approve or deny")
                           ->check(CLI::IsMember({"approve", "deny"}));
  s_decide->add_flag("--interactive", s_interactive, "Show the fingerprint and ask")->excludes(decision_opt);
  auto* s_get = session_cmd->add_subcommand("get", "Show a session");
  s_get->add_option("--url", url, "Coordinator base URL");
  s_get->add_option("--id", s_id, "Session id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  g_json = output == "json";

  try {
    if (*demo_cmd) return run_demo(demo);
    if (*scenario_run) return run_scenario_cmd(scenario_target, scenario_seed, transcript_out);
    if (*scenario_list) return list_scenarios();
    if (*threat_render) return render_threats(threat_input, threat_rule, threat_format);
    if (*bench_cmd) {
      auto [lo, hi] = service::parse_n_range(n_range);
      auto rows = service::run_bench({lo, hi, bench_t, iterations, bench_suite, bench_seed});
      ordered_json j;
      j["ok"] = true;
      j["suite_id"] = bench_suite;
      j["rows"] = ordered_json::parse(service::bench_json(rows));
      emit(j, "suite " + bench_suite + "\n" + service::bench_table(rows));
      return kExitOk;
    }
    if (*verify) return verify_cmd(v_pk, v_suite, v_msg, v_sig, v_context);
    if (*keygen) {
      auto config = load_config(config_path);
      auto created = service::provision_missing_users(config);
      service::KeyStore store(config.data_dir);
      SuiteRegistry registry = make_default_registry();
      ordered_json users = ordered_json::array();
      std::string text;
      for (const auto& u : store.users()) {
        auto key = store.load_key(u, registry);
        bool fresh = std::find(created.begin(), created.end(), u) != created.end();
        users.push_back({{"user_id", u}, {"suite_id", key.suite_id}, {"public_key", to_hex(key.group_public_key.encoding)},
                         {"created", fresh}});
        text += u + " " + key.suite_id + " " + to_hex(key.group_public_key.encoding) + (fresh ? " (new)" : "") + "\n";
      }
      emit({{"ok", true}, {"users", users}}, text);
      return kExitOk;
    }
    if (*serve) {
      auto config = load_config(config_path);
      auto svc = service::CoordinatorService::open(config);
      service::ApiServer server(*svc);
      auto stopper = stop_on_signal([&server] { server.stop(); });
      stopper.detach();
      std::cerr << "coordinator listening on " << config.listen.host << ":" << config.listen.port << " ("
                << service::to_string(config.mode) << ")\n";
      server.serve(config.listen.host, config.listen.port);
      return kExitOk;
    }
    if (*qtsp_serve) {
      auto config = load_config(config_path);
      service::ListenAddress listen;
      if (!qtsp_listen.empty()) {
        listen = service::parse_listen(qtsp_listen);
      } else {
        if (qtsp_index < 1 || qtsp_index > config.peers.size()) {
          throw Error(ErrorCode::Config, "no --listen and no peer address for this index", {"peers"});
        }
        std::string peer = config.peers[qtsp_index - 1];
        auto scheme = peer.find("://");
        listen = service::parse_listen(scheme == std::string::npos ? peer : peer.substr(scheme + 3));
      }
      service::QtspServer server(qtsp_index, config);
      auto stopper = stop_on_signal([&server] { server.stop(); });
      stopper.detach();
      std::cerr << "qtsp-" << qtsp_index << " listening on " << listen.host << ":" << listen.port << "\n";
      server.serve(listen.host, listen.port);
      return kExitOk;
    }
    service::ServiceClient client(url);
    auto show = [](const service::SessionView& v) {
      ordered_json j = ordered_json::parse(service::session_view_json(v));
      std::string text = "session:     " + v.session_id + "\nstate:       " + v.state +
                         (v.abort_reason ? " (" + *v.abort_reason + ")" : "") + "\nfingerprint: " + v.fingerprint +
                         "\n";
      if (v.signature) text += "signature:   " + *v.signature + "\n";
      emit(j, text);
      return v.state == "aborted" ? kExitFailure : kExitOk;
    };
    if (*s_create) return show(expect_view(client.create_session(s_user, s_msg), 201));
    if (*s_get) return show(expect_view(client.get_session(s_id), 200));
    if (*s_decide) {
      Hash32 auth = read_auth_key(s_auth);
      std::string decision = s_decision;
      if (s_interactive) {
        auto v = expect_view(client.get_session(s_id), 200);
        decision = ask_user(v, std::cin, g_json ? std::cerr : std::cout) ? "approve" : "deny";
      }
      if (decision.empty()) throw Error(ErrorCode::Validation, "give --decision or --interactive", {"decision"});
      return show(expect_view(client.decide(s_id, decision, auth), 200));
    }
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    return report_error(Error(ErrorCode::Io, e.what()));
  }
  return kExitUsage;
}
