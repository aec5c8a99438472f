// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/mock_backend.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "emopro/error.hpp"
#include "emopro/hashing.hpp"
#include "emopro/wav.hpp"

namespace emopro {

namespace {

std::size_t role_index(BackendRole role) { return static_cast<std::size_t>(role); }

const Json& section(const Json& fixture, const char* name) {
  static const Json kEmpty = Json::object();
  auto it = fixture.find(name);
  return it != fixture.end() && it->is_object() ? *it : kEmpty;
}

std::string ref_string(const Json& payload, const char* field) {
  if (auto ref = payload.find("ref"); ref != payload.end() && ref->is_object()) {
    if (auto it = ref->find(field); it != ref->end() && it->is_string()) {
      return it->get<std::string>();
    }
  }
  return {};
}

std::optional<long long> ref_probe(const Json& payload) {
  if (auto ref = payload.find("ref"); ref != payload.end() && ref->is_object()) {
    if (auto it = ref->find("probe"); it != ref->end() && it->is_number_integer()) {
      return it->get<long long>();
    }
  }
  return std::nullopt;
}

std::vector<std::string> utf8_code_points(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : 4;
    len = std::min(len, s.size() - i);
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<double> seeded_unit_vector(std::uint64_t seed, std::string_view key,
                                       std::size_t dim) {
  SplitMix64 rng(seed ^ stable_hash64(key));
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = 2.0 * rng.uniform() - 1.0;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

std::vector<double> normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (auto& x : v) x /= norm;
  }
  return v;
}

double seeded_in_range(std::uint64_t seed, std::string_view key, const Json& range) {
  const double lo = range.at(0).get<double>();
  const double hi = range.at(1).get<double>();
  SplitMix64 rng(seed ^ stable_hash64(key));
  return lo + (hi - lo) * rng.uniform();
}

bool list_matches(const Json& list, const std::string& candidate,
                  const std::optional<long long>& probe) {
  if (!list.is_array()) return false;
  for (const auto& entry : list) {
    if (!entry.is_string()) continue;
    const auto& s = entry.get_ref<const std::string&>();
    if (s == "*" || (!candidate.empty() && s == candidate)) return true;
    if (probe && s == candidate + "#" + std::to_string(*probe)) return true;
  }
  return false;
}

}  // namespace

MockBackend::MockBackend(Json fixture)
    : fixture_(std::move(fixture)), seed_(0) {
  if (!fixture_.is_object()) throw Error(Errc::parse, "mock fixture must be a JSON object");
  seed_ = fixture_.value("seed", std::uint64_t{0});
}

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open mock fixture " + path.string());
  try {
    return std::make_shared<MockBackend>(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw Error(Errc::parse, "mock fixture " + path.string() + ": " + e.what());
  }
}

std::size_t MockBackend::call_count(BackendRole role) const {
  return role_calls_[role_index(role)].load();
}

std::string MockBackend::handle(BackendRole role, const std::string& request_body) {
  ++calls_;
  ++role_calls_[role_index(role)];
  Json envelope;
  try {
    envelope = Json::parse(request_body);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::schema, std::string("request is not valid JSON: ") + e.what());
  }
  if (!envelope.is_object() || !envelope.contains("payload") ||
      !envelope.contains("model_id") || !envelope["model_id"].is_string()) {
    throw Error(Errc::schema, "request envelope needs 'role', 'model_id' and 'payload'");
  }
  if (envelope.value("role", std::string()) != to_string(role)) {
    throw Error(Errc::schema, "envelope role does not match endpoint");
  }
  const Json& payload = envelope["payload"];
  validate_request(role, payload);
  if (should_fail(role, payload)) {
    throw Error(Errc::transport, "injected failure for " + std::string(to_string(role)));
  }
  return make_response_envelope(role, envelope["model_id"].get<std::string>(),
                                respond(role, payload))
      .dump();
}

bool MockBackend::should_fail(BackendRole role, const Json& payload) const {
  const auto& fail = section(fixture_, "fail");
  auto it = fail.find(std::string(to_string(role)));
  if (it == fail.end()) return false;
  return list_matches(*it, ref_string(payload, "candidate"), ref_probe(payload));
}

Json MockBackend::respond(BackendRole role, const Json& payload) const {
  switch (role) {
    case BackendRole::tts: return tts(payload);
    case BackendRole::asr: return asr(payload);
    case BackendRole::speaker_embed_a:
    case BackendRole::speaker_embed_b:
    case BackendRole::emotion_embed: return embedding(role, payload);
    case BackendRole::quality:
    case BackendRole::coherence: return scalar_score(role, payload);
    case BackendRole::semantic: return semantic(payload);
  }
  throw Error(Errc::schema, "unhandled role");
}

Json MockBackend::tts(const Json& payload) const {
  const auto& cfg = section(fixture_, "tts");
  const std::string mode = cfg.value("mode", std::string("tone"));
  const std::string text = payload["text"].get<std::string>();

  if (mode == "echo") {
    const auto prompt = wav::decode(base64_decode(payload["prompt_audio"].get<std::string>()));
    return {{"audio", base64_encode(wav::encode(prompt.audio, wav::SampleFormat::pcm16, text))}};
  }
  if (mode != "tone") throw Error(Errc::schema, "unknown mock tts mode '" + mode + "'");

  std::string key = ref_string(payload, "candidate");
  if (key.empty()) key = sha256_hex(payload["prompt_audio"].get<std::string>());
  const int rate = cfg.value("sample_rate", 16000);
  const double duration = cfg.value("duration_s", 0.5);
  const double hz = 100.0 + static_cast<double>(stable_hash64(key) % 200);
  std::vector<float> samples(static_cast<std::size_t>(duration * rate));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<float>(
        0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate));
  }
  return {{"audio", base64_encode(wav::encode(samples, 1, rate, wav::SampleFormat::pcm16, text))}};
}

Json MockBackend::asr(const Json& payload) const {
  const auto& cfg = section(fixture_, "asr");
  const std::string mode = cfg.value("mode", std::string("echo"));
  const auto decoded = wav::decode(base64_decode(payload["audio"].get<std::string>()));
  const std::string candidate = ref_string(payload, "candidate");
  const auto probe = ref_probe(payload);

  if (mode == "table") {
    const auto& table = section(cfg, "table");
    if (probe) {
      if (auto it = table.find(candidate + "#" + std::to_string(*probe));
          it != table.end()) {
        return {{"text", it->get<std::string>()}};
      }
    }
    if (auto it = table.find(decoded.comment); it != table.end()) {
      return {{"text", it->get<std::string>()}};
    }
    throw Error(Errc::fixture_key_missing, "mock asr table has no entry for '" +
                                               decoded.comment + "'");
  }
  if (mode != "echo") throw Error(Errc::schema, "unknown mock asr mode '" + mode + "'");

  std::size_t drop = 0;
  if (probe && !candidate.empty()) {
    const auto& table = section(cfg, "drop_chars");
    if (auto it = table.find(candidate); it != table.end()) {
      drop = it->get<std::size_t>();
    } else if (auto max = cfg.find("drop_max"); max != cfg.end()) {
      SplitMix64 rng(seed_ ^ stable_hash64("asr|" + candidate + "#" + std::to_string(*probe)));
      drop = rng.below(max->get<std::size_t>() + 1);
    }
  }
  auto chars = utf8_code_points(decoded.comment);
  chars.resize(chars.size() > drop ? chars.size() - drop : 0);
  std::string text;
  for (const auto& c : chars) text += c;
  return {{"text", text}};
}

Json MockBackend::embedding(BackendRole role, const Json& payload) const {
  const auto& cfg = section(fixture_, "embedding");
  const std::size_t dim = cfg.value("dim", std::size_t{16});
  const std::string key_by = cfg.value("key_by", std::string("speaker_emotion"));
  const std::string candidate = ref_string(payload, "candidate");

  std::string key;
  if (key_by == "candidate") {
    key = candidate;
  } else if (key_by == "speaker") {
    key = ref_string(payload, "speaker");
  } else {
    const auto speaker = ref_string(payload, "speaker");
    const auto emotion = ref_string(payload, "emotion");
    if (!speaker.empty() || !emotion.empty()) key = speaker + "|" + emotion;
  }
  if (key.empty()) key = "audio:" + sha256_hex(payload["audio"].get<std::string>());

  std::vector<double> v;
  const auto& explicit_vectors = section(cfg, "vectors");
  if (auto it = explicit_vectors.find(key); it != explicit_vectors.end()) {
    v = it->get<std::vector<double>>();
  } else if (cfg.value("strict", false)) {
    throw Error(Errc::fixture_key_missing, "mock embedding has no vector for '" + key + "'");
  } else {
    v = seeded_unit_vector(seed_, std::string(to_string(role)) + "|" + key, dim);
  }

  const auto probe = ref_probe(payload);
  if (probe && !candidate.empty()) {
    double jitter = 0.0;
    const auto& table = section(cfg, "jitter");
    if (auto it = table.find(candidate); it != table.end()) {
      jitter = it->get<double>();
    } else if (auto max = cfg.find("jitter_max"); max != cfg.end()) {
      SplitMix64 rng(seed_ ^ stable_hash64("jitter|" + candidate));
      jitter = max->get<double>() * rng.uniform();
    }
    if (jitter > 0.0) {
      const auto noise = seeded_unit_vector(
          seed_, std::string(to_string(role)) + "|noise|" + candidate + "#" +
                     std::to_string(*probe),
          v.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += jitter * noise[i];
      v = normalized(std::move(v));
    }
  }
  return {{"embedding", v}};
}

Json MockBackend::scalar_score(BackendRole role, const Json& payload) const {
  const auto& cfg = section(fixture_, role == BackendRole::quality ? "quality" : "coherence");
  const std::string candidate = ref_string(payload, "candidate");
  const auto& table = section(cfg, "table");

  if (!candidate.empty()) {
    if (auto it = table.find(candidate); it != table.end()) return {{"score", *it}};
  }
  if (role == BackendRole::coherence) {
    if (auto it = table.find(payload["text"].get<std::string>()); it != table.end()) {
      return {{"score", *it}};
    }
  }
  if (auto it = cfg.find("seeded"); it != cfg.end()) {
    const std::string key = candidate.empty()
                                ? sha256_hex(payload.dump())
                                : std::string(to_string(role)) + "|" + candidate;
    return {{"score", seeded_in_range(seed_, key, *it)}};
  }
  if (auto it = cfg.find("default"); it != cfg.end()) return {{"score", *it}};
  throw Error(Errc::fixture_key_missing, "mock " + std::string(to_string(role)) +
                                             " has no entry for '" + candidate + "'");
}

Json MockBackend::semantic(const Json& payload) const {
  const auto& cfg = section(fixture_, "semantic");
  const std::string mode = cfg.value("mode", std::string("table"));
  const auto target = payload["target_text"].get<std::string>();
  Json scores = Json::array();
  for (const auto& t : payload["candidate_texts"]) {
    const auto& text = t.get_ref<const std::string&>();
    if (mode == "exact_match") {
      scores.push_back(text == target ? 1.0 : 0.0);
      continue;
    }
    const auto& pairs = section(cfg, "pairs");
    if (auto row = pairs.find(target); row != pairs.end() && row->contains(text)) {
      scores.push_back((*row)[text]);
      continue;
    }
    const auto& table = section(cfg, "table");
    if (auto it = table.find(text); it != table.end()) {
      scores.push_back(*it);
      continue;
    }
    if (auto it = cfg.find("default"); it != cfg.end()) {
      scores.push_back(*it);
      continue;
    }
    throw Error(Errc::fixture_key_missing, "mock semantic table has no entry for '" + text + "'");
  }
  return {{"scores", scores}};
}

std::string MockTransport::send(BackendRole role, const Endpoint& /*endpoint*/,
                                const std::string& body) {
  return backend_->handle(role, body);
}

MockServer::MockServer(std::shared_ptr<MockBackend> backend)
    : backend_(std::move(backend)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

MockServer::~MockServer() { stop(); }

void MockServer::install_routes() {
  for (BackendRole role : kAllRoles) {
    server_->Post(std::string(endpoint_path(role)),
                  [this, role](const httplib::Request& req, httplib::Response& res) {
                    ++requests_;
                    try {
                      res.set_content(backend_->handle(role, req.body), "application/json");
                    } catch (const Error& e) {
                      res.status = e.code() == Errc::transport             ? 503
                                   : e.code() == Errc::fixture_key_missing ? 404
                                                                           : 400;
                      res.set_content(make_error_envelope(to_string(e.code()), e.what()).dump(),
                                      "application/json");
                    }
                  });
  }
  server_->Get(std::string(kHealthPath), [this](const httplib::Request&,
                                                httplib::Response& res) {
    Json roles = Json::array();
    for (BackendRole role : kAllRoles) {
      roles.push_back({{"role", to_string(role)},
                       {"model_id", "mock:" + std::string(to_string(role))}});
    }
    res.set_content(Json{{"status", "ok"},
                         {"roles", roles},
                         {"requests", requests_.load()}}
                        .dump(),
                    "application/json");
  });
}

int MockServer::start(int port, const std::string& host) {
  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else if (server_->bind_to_port(host, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) throw Error(Errc::io, "mock server cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockServer::listen_blocking(int port, const std::string& host) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) {
    throw Error(Errc::io, "mock server cannot listen on " + host + ":" + std::to_string(port));
  }
}

void MockServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace emopro
