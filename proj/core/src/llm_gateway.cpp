// Copyright 2026 The Mapforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "mapforge/llm_gateway.hpp"

#include <thread>

#include <nlohmann/json.hpp>

#include "mapforge/digest.hpp"
#include "mapforge/errors.hpp"

namespace mapforge::llm {

using nlohmann::json;

std::string_view to_string(MessageRole role) {
  switch (role) {
    case MessageRole::System:
      return "system";
    case MessageRole::User:
      return "user";
    case MessageRole::Assistant:
      return "assistant";
  }
  return "unknown";
}

std::optional<MessageRole> message_role_from_string(std::string_view name) {
  if (name == "system") return MessageRole::System;
  if (name == "user") return MessageRole::User;
  if (name == "assistant") return MessageRole::Assistant;
  return std::nullopt;
}

CostLedger& CostLedger::operator+=(const CostLedger& other) {
  input_tokens += other.input_tokens;
  output_tokens += other.output_tokens;
  calls += other.calls;
  wall_time_ms += other.wall_time_ms;
  return *this;
}

CostLedger& ledger_add(CostLedger& ledger, const ChatResponse& resp) {
  ledger.input_tokens += resp.usage.prompt_tokens;
  ledger.output_tokens += resp.usage.completion_tokens;
  ledger.calls += 1;
  ledger.wall_time_ms += resp.latency_ms;
  return ledger;
}

void to_json(json& j, const ChatMessage& m) {
  j = json{{"role", std::string(to_string(m.role))}, {"content", m.content}};
}

void from_json(const json& j, ChatMessage& m) {
  const auto role = message_role_from_string(j.at("role").get<std::string>());
  if (!role) {
    throw SchemaError(0, "role", "unknown message role");
  }
  m.role = *role;
  m.content = j.at("content").get<std::string>();
}

void to_json(json& j, const ChatRequest& r) {
  j = json{{"model", r.model},
           {"messages", r.messages},
           {"temperature", r.temperature},
           {"max_tokens", r.max_tokens}};
  if (!r.stop.empty()) {
    j["stop"] = r.stop;
  }
}

void from_json(const json& j, ChatRequest& r) {
  r.model = j.at("model").get<std::string>();
  r.messages = j.at("messages").get<std::vector<ChatMessage>>();
  r.temperature = j.value("temperature", 0.0);
  r.max_tokens = j.value("max_tokens", 2048);
  r.stop = j.value("stop", std::vector<std::string>{});
}

void to_json(json& j, const Usage& u) {
  j = json{{"prompt_tokens", u.prompt_tokens},
           {"completion_tokens", u.completion_tokens}};
}

void from_json(const json& j, Usage& u) {
  u.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  u.completion_tokens = j.value("completion_tokens", std::int64_t{0});
}

void to_json(json& j, const ChatResponse& r) {
  j = json{{"content", r.content},
           {"usage", r.usage},
           {"latency_ms", r.latency_ms},
           {"backend_id", r.backend_id}};
}

void from_json(const json& j, ChatResponse& r) {
  r.content = j.at("content").get<std::string>();
  r.usage = j.value("usage", Usage{});
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.backend_id = j.value("backend_id", std::string{});
}

void to_json(json& j, const CostLedger& l) {
  j = json{{"input_tokens", l.input_tokens},
           {"output_tokens", l.output_tokens},
           {"calls", l.calls},
           {"wall_time_ms", l.wall_time_ms}};
}

void from_json(const json& j, CostLedger& l) {
  l.input_tokens = j.value("input_tokens", std::int64_t{0});
  l.output_tokens = j.value("output_tokens", std::int64_t{0});
  l.calls = j.value("calls", std::int64_t{0});
  l.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
}

std::string cassette_key(const ChatRequest& req) {
  // nlohmann::json orders object keys, so dump() is canonical.
  const json canonical{{"model", req.model},
                       {"messages", req.messages},
                       {"temperature", req.temperature},
                       {"max_tokens", req.max_tokens},
                       {"stop", req.stop}};
  return sha256_hex(canonical.dump());
}

struct Cassette::Line {
  std::string key;
  json record;
  ChatResponse response;
};

Cassette::Cassette() = default;

Cassette::Cassette(Cassette&& other) noexcept {
  std::lock_guard lock(other.mu_);
  lines_ = std::move(other.lines_);
  index_ = std::move(other.index_);
  sink_ = std::move(other.sink_);
}

Cassette& Cassette::operator=(Cassette&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    lines_ = std::move(other.lines_);
    index_ = std::move(other.index_);
    sink_ = std::move(other.sink_);
  }
  return *this;
}

Cassette::~Cassette() = default;

Cassette Cassette::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open cassette: " + path.string());
  }
  Cassette cassette;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) {
      continue;
    }
    json record;
    try {
      record = json::parse(text);
    } catch (const std::exception& e) {
      throw SchemaError(line_no, "record", e.what());
    }
    if (!record.contains("key") || !record.contains("response")) {
      throw SchemaError(line_no, "key", "cassette record missing key/response");
    }
    Line line;
    line.key = record.at("key").get<std::string>();
    line.response = record.at("response").get<ChatResponse>();
    line.record = std::move(record);
    cassette.index_[line.key] = cassette.lines_.size();
    cassette.lines_.push_back(std::move(line));
  }
  return cassette;
}

void Cassette::open_sink(const std::filesystem::path& path) {
  std::lock_guard lock(mu_);
  sink_.open(path, std::ios::app);
  if (!sink_) {
    throw IoError("cannot open cassette sink: " + path.string());
  }
}

void Cassette::record(const ChatRequest& req, const ChatResponse& resp) {
  Line line;
  line.key = cassette_key(req);
  line.record = json{{"key", line.key}, {"request", req}, {"response", resp}};
  line.response = resp;

  std::lock_guard lock(mu_);
  if (sink_.is_open()) {
    sink_ << line.record.dump() << '\n';
    sink_.flush();
  }
  index_[line.key] = lines_.size();
  lines_.push_back(std::move(line));
}

std::optional<ChatResponse> Cassette::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = index_.find(key);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return lines_[it->second].response;
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return lines_.size();
}

void Cassette::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mu_);
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write cassette: " + path.string());
  }
  for (const Line& line : lines_) {
    out << line.record.dump() << '\n';
  }
  if (!out) {
    throw IoError("cassette write failed: " + path.string());
  }
}

namespace {

// Splits "http://host:port/prefix" into the part httplib accepts and the
// path prefix to prepend to request paths.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const std::size_t host_start =
      scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) {
    return {url, ""};
  }
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') {
    prefix.pop_back();
  }
  return {url.substr(0, path_start), prefix};
}

}  // namespace

HttpBackend::HttpBackend(std::string base_url, std::string api_key,
                         RetryPolicy retry, std::string backend_id)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      retry_(retry),
      backend_id_(std::move(backend_id)) {}

ChatResponse HttpBackend::complete(const ChatRequest& req) {
  const auto [host, prefix] = split_base_url(base_url_);
  const std::string path = prefix + "/v1/chat/completions";
  const std::string body = json(req).dump();

  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= retry_.retry_limit; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(retry_.base_delay * (1 << (attempt - 1)));
    }
    httplib::Client client(host);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(600, 0);
    client.set_write_timeout(60, 0);

    const auto start = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(path, headers, body, "application/json");
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                               base_url_ + ": " + res->body.substr(0, 200),
                           /*retryable=*/false);
    }

    json payload;
    try {
      payload = json::parse(res->body);
    } catch (const std::exception& e) {
      throw TransportError(
          "malformed completion body from " + base_url_ + ": " + e.what(),
          /*retryable=*/false);
    }
    if (!payload.contains("choices") || payload["choices"].empty()) {
      throw TransportError("completion body has no choices", false);
    }

    ChatResponse resp;
    resp.content = payload["choices"][0]
                       .value("message", json::object())
                       .value("content", std::string{});
    resp.usage = payload.value("usage", Usage{});
    resp.latency_ms = latency.count();
    resp.backend_id = backend_id_;
    return resp;
  }
  throw TransportError("completion failed after " +
                       std::to_string(retry_.retry_limit) +
                       " retries: " + last_error);
}

ReplayBackend::ReplayBackend(std::shared_ptr<const Cassette> cassette)
    : cassette_(std::move(cassette)) {}

ChatResponse ReplayBackend::complete(const ChatRequest& req) {
  const std::string key = cassette_key(req);
  if (auto hit = cassette_->find(key)) {
    return *hit;
  }
  throw ReplayMissError("no cassette entry for key " + key +
                        " (model=" + req.model + ")");
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner,
                                   std::shared_ptr<Cassette> cassette)
    : inner_(std::move(inner)), cassette_(std::move(cassette)) {}

ChatResponse RecordingBackend::complete(const ChatRequest& req) {
  ChatResponse resp = inner_->complete(req);
  cassette_->record(req, resp);
  return resp;
}

std::string RecordingBackend::id() const { return inner_->id() + "+record"; }

void LedgerAccumulator::add(const ChatResponse& resp) {
  input_tokens_.fetch_add(resp.usage.prompt_tokens,
                          std::memory_order_relaxed);
  output_tokens_.fetch_add(resp.usage.completion_tokens,
                           std::memory_order_relaxed);
  calls_.fetch_add(1, std::memory_order_relaxed);
  wall_time_ms_.fetch_add(resp.latency_ms, std::memory_order_relaxed);
}

CostLedger LedgerAccumulator::snapshot() const {
  CostLedger ledger;
  ledger.input_tokens = input_tokens_.load(std::memory_order_relaxed);
  ledger.output_tokens = output_tokens_.load(std::memory_order_relaxed);
  ledger.calls = calls_.load(std::memory_order_relaxed);
  ledger.wall_time_ms = wall_time_ms_.load(std::memory_order_relaxed);
  return ledger;
}

void Gateway::set_role(AgentRole role, RoleEndpoint endpoint) {
  endpoints_[role] = std::move(endpoint);
}

bool Gateway::has_role(AgentRole role) const {
  return endpoints_.count(role) > 0;
}

const Gateway::RoleEndpoint& Gateway::role_endpoint(AgentRole role) const {
  const auto it = endpoints_.find(role);
  if (it == endpoints_.end()) {
    throw ConfigError("no backend configured for role '" +
                      std::string(to_string(role)) + "'");
  }
  return it->second;
}

ChatRequest Gateway::build_request(AgentRole role,
                                   std::vector<ChatMessage> messages) const {
  const RoleEndpoint& ep = role_endpoint(role);
  ChatRequest req;
  req.model = ep.model;
  req.messages = std::move(messages);
  req.temperature = ep.temperature;
  req.max_tokens = ep.max_tokens;
  return req;
}

ChatResponse Gateway::complete(AgentRole role,
                               std::vector<ChatMessage> messages) {
  const RoleEndpoint& ep = role_endpoint(role);
  ChatResponse resp = ep.backend->complete(build_request(role, std::move(messages)));
  ledger_.add(resp);
  return resp;
}

}  // namespace mapforge::llm
