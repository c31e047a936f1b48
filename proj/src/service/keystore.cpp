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

#include "qoesign/service/keystore.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qoesign/crypto.hpp"
#include "qoesign/errors.hpp"
#include "qoesign/service/config.hpp"

namespace qoesign::service {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using protocol::DistributedKey;
using protocol::Holder;
using protocol::KeyShare;

namespace {

constexpr std::string_view kSealDomain = "QOESIGN/v1/user-share";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "missing key material: " + p.string(), {p.string()});
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content, bool secret) {
  fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    if (secret) fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

ordered_json parse_json(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Decode, what + " is not valid JSON: " + e.what());
  }
}

template <typename T>
T field(const ordered_json& j, const char* key, const std::string& what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Decode, what + "." + key + ": " + e.what());
  }
}

Bytes seal_aad(std::string_view user_id, const KeyShare& share) {
  ByteWriter w;
  w.raw(as_bytes(kSealDomain)).lp8(as_bytes(user_id)).lp8(as_bytes(share.suite_id)).u32(share.epoch);
  return std::move(w).take();
}

std::string share_to_json(const KeyShare& share, const Group& group) {
  ordered_json j;
  j["holder"] = share.holder.name();
  j["suite_id"] = share.suite_id;
  j["epoch"] = share.epoch;
  j["secret"] = to_hex(group.encode_scalar(share.secret));
  return j.dump(2) + "\n";
}

KeyShare share_from_json(const ordered_json& j, const SuiteRegistry& registry, const std::string& what) {
  KeyShare s;
  s.holder = Holder::parse(field<std::string>(j, "holder", what));
  s.suite_id = field<std::string>(j, "suite_id", what);
  s.epoch = field<std::uint32_t>(j, "epoch", what);
  s.secret = registry.resolve(s.suite_id).require_group().decode_scalar(from_hex(field<std::string>(j, "secret", what)));
  return s;
}

}  // namespace

Hash32 derive_user_auth_key(ByteView transport_secret, std::string_view user_id) {
  ByteWriter w;
  w.raw(as_bytes("QOESIGN/v1/user-auth")).lp8(as_bytes(user_id));
  return crypto::hmac_sha256(transport_secret, w.bytes());
}

std::string key_to_json(const DistributedKey& key, const SignatureSuite& suite) {
  const Group& g = suite.require_group();
  auto hex = [&](const Element& e) { return to_hex(g.encode(e)); };
  ordered_json j;
  j["suite_id"] = key.suite_id;
  j["t"] = key.access.t;
  j["n"] = key.access.n;
  j["epoch"] = key.epoch;
  j["group_public_key"] = hex(key.group_public_key);
  j["user_public_share"] = hex(key.user_public_share);
  ordered_json dealers = ordered_json::object();
  for (const auto& [i, e] : key.dealer_constant_commitments) dealers[std::to_string(i)] = hex(e);
  j["dealer_constant_commitments"] = dealers;
  ordered_json agg = ordered_json::array();
  for (const auto& e : key.aggregate_commitments) agg.push_back(hex(e));
  j["aggregate_commitments"] = agg;
  ordered_json pub = ordered_json::object();
  for (const auto& [i, e] : key.qtsp_public_shares) pub[std::to_string(i)] = hex(e);
  j["qtsp_public_shares"] = pub;
  return j.dump(2) + "\n";
}

DistributedKey key_from_json(std::string_view json_text, const SuiteRegistry& registry) {
  const std::string what = "key";
  auto j = parse_json(std::string(json_text), what);
  DistributedKey k;
  k.suite_id = field<std::string>(j, "suite_id", what);
  const Group& g = registry.resolve(k.suite_id).require_group();
  auto elem = [&](const std::string& h) { return g.decode(from_hex(h)); };
  auto index = [&](const std::string& s) {
    try {
      return static_cast<std::uint32_t>(std::stoul(s));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Decode, "key: bad holder index '" + s + "'");
    }
  };
  k.access.t = field<std::uint32_t>(j, "t", what);
  k.access.n = field<std::uint32_t>(j, "n", what);
  k.access.validate();
  k.epoch = field<std::uint32_t>(j, "epoch", what);
  k.group_public_key = elem(field<std::string>(j, "group_public_key", what));
  k.user_public_share = elem(field<std::string>(j, "user_public_share", what));
  const auto dealers = field<ordered_json>(j, "dealer_constant_commitments", what);
  for (const auto& [i, v] : dealers.items()) {
    k.dealer_constant_commitments[index(i)] = elem(v.get<std::string>());
  }
  for (const auto& v : field<std::vector<std::string>>(j, "aggregate_commitments", what)) {
    k.aggregate_commitments.push_back(elem(v));
  }
  const auto public_shares = field<ordered_json>(j, "qtsp_public_shares", what);
  for (const auto& [i, v] : public_shares.items()) {
    k.qtsp_public_shares[index(i)] = elem(v.get<std::string>());
  }
  k.check_consistency(g);
  return k;
}

KeyStore::KeyStore(std::string data_dir) : dir_(std::move(data_dir)) {}

std::string KeyStore::user_dir(const std::string& user_id) const {
  validate_user_id(user_id);
  return (fs::path(dir_) / "users" / user_id).string();
}

std::string KeyStore::qtsp_dir(std::uint32_t index) const {
  return (fs::path(dir_) / ("qtsp-" + std::to_string(index))).string();
}

std::string KeyStore::ledger_path(const std::string& user_id) const {
  validate_user_id(user_id);
  return (fs::path(dir_) / "ledgers" / (user_id + ".ledger")).string();
}

Bytes KeyStore::transport_secret(RandomSource& rng) {
  fs::path p = fs::path(dir_) / "transport.key";
  if (fs::exists(p)) return transport_secret();
  Bytes secret(32);
  rng.fill(secret);
  write_file(p, to_hex(secret) + "\n", true);
  return secret;
}

Bytes KeyStore::transport_secret() const {
  std::string text = read_file(fs::path(dir_) / "transport.key");
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  Bytes secret = from_hex(text);
  if (secret.size() != 32) throw Error(ErrorCode::Decode, "transport.key must hold 32 bytes");
  return secret;
}

bool KeyStore::has_user(const std::string& user_id) const {
  return fs::exists(fs::path(user_dir(user_id)) / "key.json");
}

std::vector<std::string> KeyStore::users() const {
  std::vector<std::string> out;
  fs::path root = fs::path(dir_) / "users";
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "key.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

DistributedKey KeyStore::provision_user(const std::string& user_id, const protocol::AccessStructure& access,
                                        const SignatureSuite& suite, const std::string& passphrase,
                                        RandomSource& user_rng, const std::vector<RandomSource*>& dealer_rngs,
                                        RandomSource& seal_rng) {
  if (has_user(user_id)) throw Error(ErrorCode::Duplicate, "user '" + user_id + "' is already provisioned");
  if (passphrase.empty()) throw Error(ErrorCode::Config, "user passphrase must not be empty");
  Bytes secret = transport_secret(seal_rng);
  protocol::DkgResult d = protocol::dkg(access, suite, user_rng, dealer_rngs);
  const Group& g = suite.require_group();

  for (const auto& share : d.qtsp_shares) {
    write_file(fs::path(qtsp_dir(share.holder.index)) / (user_id + ".share.json"), share_to_json(share, g), true);
  }

  Bytes salt(16), nonce(12);
  seal_rng.fill(salt);
  seal_rng.fill(nonce);
  Bytes kek = crypto::pbkdf2_sha256(passphrase, salt, kPbkdf2Iterations, 32);
  Bytes plain = g.encode_scalar(d.user_share.secret);
  Bytes sealed = crypto::aes_gcm_seal(kek, plain, seal_aad(user_id, d.user_share), nonce);
  ordered_json sj;
  sj["version"] = 1;
  sj["suite_id"] = d.user_share.suite_id;
  sj["epoch"] = d.user_share.epoch;
  sj["kdf"] = "pbkdf2-sha256";
  sj["iterations"] = kPbkdf2Iterations;
  sj["salt"] = to_hex(salt);
  sj["aead"] = "aes-256-gcm";
  sj["sealed"] = to_hex(sealed);
  fs::path udir = user_dir(user_id);
  write_file(udir / "user_share.sealed.json", sj.dump(2) + "\n", true);
  write_file(udir / "auth.key", to_hex(derive_user_auth_key(secret, user_id)) + "\n", true);
  // key.json last: its presence marks the user as fully provisioned.
  write_file(udir / "key.json", key_to_json(d.key, suite), false);
  return d.key;
}

DistributedKey KeyStore::load_key(const std::string& user_id, const SuiteRegistry& registry) const {
  fs::path p = fs::path(user_dir(user_id)) / "key.json";
  if (!fs::exists(p)) throw Error(ErrorCode::NotFound, "unknown user '" + user_id + "'", {user_id});
  return key_from_json(read_file(p), registry);
}

KeyShare KeyStore::load_qtsp_share(std::uint32_t index, const std::string& user_id,
                                   const SuiteRegistry& registry) const {
  validate_user_id(user_id);
  fs::path p = fs::path(qtsp_dir(index)) / (user_id + ".share.json");
  const std::string what = p.filename().string();
  KeyShare s = share_from_json(parse_json(read_file(p), what), registry, what);
  if (s.holder != Holder::qtsp(index)) throw Error(ErrorCode::InvalidKey, what + " belongs to " + s.holder.name());
  return s;
}

KeyShare KeyStore::unseal_user_share(const std::string& user_id, const std::string& passphrase,
                                     const SuiteRegistry& registry) const {
  fs::path p = fs::path(user_dir(user_id)) / "user_share.sealed.json";
  const std::string what = "user_share.sealed.json";
  auto j = parse_json(read_file(p), what);
  if (field<int>(j, "version", what) != 1 || field<std::string>(j, "kdf", what) != "pbkdf2-sha256" ||
      field<std::string>(j, "aead", what) != "aes-256-gcm") {
    throw Error(ErrorCode::Decode, what + ": unsupported sealing parameters");
  }
  KeyShare s;
  s.holder = Holder::user();
  s.suite_id = field<std::string>(j, "suite_id", what);
  s.epoch = field<std::uint32_t>(j, "epoch", what);
  int iterations = field<int>(j, "iterations", what);
  if (iterations < 10000) throw Error(ErrorCode::Decode, what + ": iteration count too low");
  Bytes kek = crypto::pbkdf2_sha256(passphrase, from_hex(field<std::string>(j, "salt", what)), iterations, 32);
  Bytes plain;
  try {
    plain = crypto::aes_gcm_open(kek, from_hex(field<std::string>(j, "sealed", what)), seal_aad(user_id, s));
  } catch (const Error&) {
    throw Error(ErrorCode::Unauthenticated, "cannot unseal the share of user '" + user_id + "'", {user_id});
  }
  s.secret = registry.resolve(s.suite_id).require_group().decode_scalar(plain);
  return s;
}

Hash32 KeyStore::user_auth_key(const std::string& user_id) const {
  std::string text = read_file(fs::path(user_dir(user_id)) / "auth.key");
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return fixed_from_hex<32>(text);
}

}  // namespace qoesign::service
