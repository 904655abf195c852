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

#ifndef MAPFORGE_LLM_GATEWAY_HPP_
#define MAPFORGE_LLM_GATEWAY_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mapforge/roles.hpp"

namespace mapforge::llm {

enum class MessageRole { System, User, Assistant };

std::string_view to_string(MessageRole role);
std::optional<MessageRole> message_role_from_string(std::string_view name);

struct ChatMessage {
  MessageRole role = MessageRole::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 2048;
  std::vector<std::string> stop;

  bool operator==(const ChatRequest&) const = default;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  bool operator==(const Usage&) const = default;
};

struct ChatResponse {
  std::string content;
  Usage usage;
  std::int64_t latency_ms = 0;
  std::string backend_id;

  bool operator==(const ChatResponse&) const = default;
};

struct CostLedger {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::int64_t calls = 0;
  std::int64_t wall_time_ms = 0;

  bool operator==(const CostLedger&) const = default;
  CostLedger& operator+=(const CostLedger& other);
};

// Accumulates token and call counts; wall time is the sum of response
// latencies so replayed runs report identical figures.
CostLedger& ledger_add(CostLedger& ledger, const ChatResponse& resp);

void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const ChatRequest& r);
void from_json(const nlohmann::json& j, ChatRequest& r);
void to_json(nlohmann::json& j, const Usage& u);
void from_json(const nlohmann::json& j, Usage& u);
void to_json(nlohmann::json& j, const ChatResponse& r);
void from_json(const nlohmann::json& j, ChatResponse& r);
void to_json(nlohmann::json& j, const CostLedger& l);
void from_json(const nlohmann::json& j, CostLedger& l);

// Digest over (model, messages, temperature, max_tokens, stop). Equal
// requests yield equal keys; any field difference changes the key.
std::string cassette_key(const ChatRequest& req);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
  virtual std::string id() const = 0;
};

// Recorded request/response pairs, indexed by cassette_key. Append is
// thread-safe; lookups are safe alongside appends.
class Cassette {
 public:
  Cassette();
  Cassette(Cassette&&) noexcept;
  Cassette& operator=(Cassette&&) noexcept;
  ~Cassette();

  static Cassette load(const std::filesystem::path& path);

  // Opens `path` for appending; every record() call writes one line through
  // it immediately. Without a sink, records accumulate in memory only.
  void open_sink(const std::filesystem::path& path);

  void record(const ChatRequest& req, const ChatResponse& resp);
  std::optional<ChatResponse> find(const std::string& key) const;
  std::size_t size() const;
  void save(const std::filesystem::path& path) const;

 private:
  struct Line;
  mutable std::mutex mu_;
  std::vector<Line> lines_;
  std::unordered_map<std::string, std::size_t> index_;
  std::ofstream sink_;
};

struct RetryPolicy {
  int retry_limit = 3;
  std::chrono::milliseconds base_delay{500};
};

// Live client for an OpenAI-compatible chat completions endpoint.
// Transient failures (connect errors, 429, 5xx) are retried with
// exponential backoff; other HTTP errors fail immediately.
class HttpBackend : public ChatBackend {
 public:
  HttpBackend(std::string base_url, std::string api_key,
              RetryPolicy retry = {}, std::string backend_id = "http");

  ChatResponse complete(const ChatRequest& req) override;
  std::string id() const override { return backend_id_; }

 private:
  std::string base_url_;
  std::string api_key_;
  RetryPolicy retry_;
  std::string backend_id_;
};

// Serves responses from a cassette; unknown request keys raise
// ReplayMissError.
class ReplayBackend : public ChatBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<const Cassette> cassette);

  ChatResponse complete(const ChatRequest& req) override;
  std::string id() const override { return "replay"; }

 private:
  std::shared_ptr<const Cassette> cassette_;
};

// Forwards to an inner backend and records every exchange.
class RecordingBackend : public ChatBackend {
 public:
  RecordingBackend(std::shared_ptr<ChatBackend> inner,
                   std::shared_ptr<Cassette> cassette);

  ChatResponse complete(const ChatRequest& req) override;
  std::string id() const override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<Cassette> cassette_;
};

// Thread-safe ledger shared across pipeline workers.
class LedgerAccumulator {
 public:
  void add(const ChatResponse& resp);
  CostLedger snapshot() const;

 private:
  std::atomic<std::int64_t> input_tokens_{0};
  std::atomic<std::int64_t> output_tokens_{0};
  std::atomic<std::int64_t> calls_{0};
  std::atomic<std::int64_t> wall_time_ms_{0};
};

// Routes each agent role to its configured backend and sampling
// parameters, and accounts every successful completion.
class Gateway {
 public:
  struct RoleEndpoint {
    std::shared_ptr<ChatBackend> backend;
    std::string model;
    double temperature = 0.0;
    int max_tokens = 2048;
  };

  void set_role(AgentRole role, RoleEndpoint endpoint);
  bool has_role(AgentRole role) const;
  const RoleEndpoint& role_endpoint(AgentRole role) const;

  ChatRequest build_request(AgentRole role,
                            std::vector<ChatMessage> messages) const;
  ChatResponse complete(AgentRole role, std::vector<ChatMessage> messages);

  CostLedger ledger() const { return ledger_.snapshot(); }

 private:
  std::map<AgentRole, RoleEndpoint> endpoints_;
  LedgerAccumulator ledger_;
};

}  // namespace mapforge::llm

#endif  // MAPFORGE_LLM_GATEWAY_HPP_
