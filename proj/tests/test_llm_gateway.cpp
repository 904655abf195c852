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

#include <atomic>
#include <cctype>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "mapforge/errors.hpp"
#include "mapforge/llm_gateway.hpp"
#include "support/test_support.hpp"

using namespace mapforge;
using namespace mapforge::testing;
using nlohmann::json;

namespace {

llm::ChatRequest sample_request(std::string model = "test-model") {
  llm::ChatRequest req;
  req.model = std::move(model);
  req.messages = {{llm::MessageRole::System, "be terse"},
                  {llm::MessageRole::User, "solve it"}};
  req.temperature = 0;
  req.max_tokens = 512;
  return req;
}

llm::ChatResponse sample_response(std::string content = "answer") {
  llm::ChatResponse resp;
  resp.content = std::move(content);
  resp.usage.prompt_tokens = 11;
  resp.usage.completion_tokens = 4;
  resp.latency_ms = 120;
  resp.backend_id = "test";
  return resp;
}

// Minimal OpenAI-style completion server for HttpBackend tests.
class StubServer {
 public:
  using Handler = std::function<void(const httplib::Request&,
                                     httplib::Response&)>;

  explicit StubServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post(".*", [this](const httplib::Request& req,
                              httplib::Response& res) {
      hits_.fetch_add(1);
      last_path_ = req.path;
      auto auth = req.get_header_value("Authorization");
      {
        std::lock_guard<std::mutex> lock(mu_);
        last_auth_ = auth;
        last_body_ = req.body;
      }
      handler_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }
  int hits() const { return hits_.load(); }
  std::string last_path() const { return last_path_; }
  std::string last_auth() const {
    std::lock_guard<std::mutex> lock(mu_);
    return last_auth_;
  }
  std::string last_body() const {
    std::lock_guard<std::mutex> lock(mu_);
    return last_body_;
  }

  static void respond_ok(httplib::Response& res, const std::string& content) {
    json body = {
        {"choices", json::array({{{"message", {{"role", "assistant"},
                                               {"content", content}}}}})},
        {"usage", {{"prompt_tokens", 10}, {"completion_tokens", 5}}},
    };
    res.set_content(body.dump(), "application/json");
  }

 private:
  httplib::Server server_;
  Handler handler_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::string last_path_;
  mutable std::mutex mu_;
  std::string last_auth_;
  std::string last_body_;
};

}  // namespace

TEST_CASE("cassette_key is a stable content hash of the request") {
  auto req = sample_request();
  auto key = llm::cassette_key(req);
  CHECK(key.size() == 64);
  for (char c : key) {
    CHECK(std::isxdigit(static_cast<unsigned char>(c)));
    CHECK_FALSE(std::isupper(static_cast<unsigned char>(c)));
  }
  CHECK(llm::cassette_key(sample_request()) == key);

  auto other_model = sample_request("other-model");
  CHECK(llm::cassette_key(other_model) != key);

  auto other_text = sample_request();
  other_text.messages[1].content += "!";
  CHECK(llm::cassette_key(other_text) != key);

  auto other_temp = sample_request();
  other_temp.temperature = 0.7;
  CHECK(llm::cassette_key(other_temp) != key);

  auto other_max = sample_request();
  other_max.max_tokens = 513;
  CHECK(llm::cassette_key(other_max) != key);
}

TEST_CASE("ledger_add accumulates one call per response") {
  llm::CostLedger ledger;
  llm::ledger_add(ledger, sample_response());
  llm::ledger_add(ledger, sample_response());
  CHECK(ledger.input_tokens == 22);
  CHECK(ledger.output_tokens == 8);
  CHECK(ledger.calls == 2);
  CHECK(ledger.wall_time_ms == 240);

  llm::CostLedger other;
  other.input_tokens = 1;
  other.output_tokens = 2;
  other.calls = 3;
  other.wall_time_ms = 4;
  ledger += other;
  CHECK(ledger.input_tokens == 23);
  CHECK(ledger.output_tokens == 10);
  CHECK(ledger.calls == 5);
  CHECK(ledger.wall_time_ms == 244);
}

TEST_CASE("cassette records are findable and survive save/load") {
  TempDir dir;
  llm::Cassette cassette;
  auto req1 = sample_request("model-a");
  auto req2 = sample_request("model-b");
  cassette.record(req1, sample_response("one"));
  cassette.record(req2, sample_response("two"));
  CHECK(cassette.size() == 2);

  auto hit = cassette.find(llm::cassette_key(req1));
  REQUIRE(hit.has_value());
  CHECK(hit->content == "one");
  CHECK(hit->latency_ms == 120);
  CHECK_FALSE(cassette.find("feedbeef").has_value());

  auto path = dir / "tape.jsonl";
  cassette.save(path);
  auto reloaded = llm::Cassette::load(path);
  CHECK(reloaded.size() == 2);
  auto hit2 = reloaded.find(llm::cassette_key(req2));
  REQUIRE(hit2.has_value());
  CHECK(hit2->content == "two");
  CHECK(hit2->usage.prompt_tokens == 11);
  CHECK(hit2->backend_id == "test");
}

TEST_CASE("open_sink streams records to disk as they arrive") {
  TempDir dir;
  auto path = dir / "live.jsonl";
  llm::Cassette cassette;
  cassette.open_sink(path);
  cassette.record(sample_request("m1"), sample_response("r1"));
  auto after_one = read_file(path);
  CHECK(std::count(after_one.begin(), after_one.end(), '\n') == 1);
  cassette.record(sample_request("m2"), sample_response("r2"));
  auto after_two = read_file(path);
  CHECK(std::count(after_two.begin(), after_two.end(), '\n') == 2);

  auto reloaded = llm::Cassette::load(path);
  CHECK(reloaded.size() == 2);
}

TEST_CASE("cassette load errors carry the line number") {
  TempDir dir;
  CHECK_THROWS_AS(llm::Cassette::load(dir / "missing.jsonl"), IoError);

  auto bad = dir / "bad.jsonl";
  write_file(bad, "{\"key\": \"k\", \"response\": {\"content\": \"x\"}}\nnot json\n");
  try {
    llm::Cassette::load(bad);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
  }

  auto incomplete = dir / "incomplete.jsonl";
  write_file(incomplete, "{\"key\": \"k\"}\n");
  CHECK_THROWS_AS(llm::Cassette::load(incomplete), SchemaError);
}

TEST_CASE("replay backend serves hits and raises on misses") {
  auto cassette = std::make_shared<llm::Cassette>();
  auto req = sample_request();
  cassette->record(req, sample_response("replayed"));
  llm::ReplayBackend replay(cassette);

  auto resp = replay.complete(req);
  CHECK(resp.content == "replayed");
  CHECK(resp.latency_ms == 120);
  CHECK(resp.usage.completion_tokens == 4);

  auto miss = sample_request("never-recorded");
  try {
    replay.complete(miss);
    FAIL("expected ReplayMissError");
  } catch (const ReplayMissError& e) {
    CHECK(std::string(e.what()).find("never-recorded") != std::string::npos);
  }
}

TEST_CASE("recording backend forwards and captures") {
  auto inner = std::make_shared<ScriptedBackend>(
      [](const llm::ChatRequest&) { return std::string("inner says hi"); });
  auto cassette = std::make_shared<llm::Cassette>();
  llm::RecordingBackend recording(inner, cassette);
  CHECK(recording.id() == "scripted+record");

  auto req = sample_request();
  auto resp = recording.complete(req);
  CHECK(resp.content == "inner says hi");
  CHECK(cassette->size() == 1);
  auto hit = cassette->find(llm::cassette_key(req));
  REQUIRE(hit.has_value());
  CHECK(hit->content == "inner says hi");

  // Recorded traffic replays without the inner backend.
  llm::ReplayBackend replay(cassette);
  CHECK(replay.complete(req).content == "inner says hi");
  CHECK(inner->call_count() == 1);
}

TEST_CASE("gateway routes per role and accumulates the ledger") {
  auto backend = std::make_shared<ScriptedBackend>(
      [](const llm::ChatRequest& req) { return "echo:" + req.model; });
  llm::Gateway gw;
  CHECK_FALSE(gw.has_role(AgentRole::Coding));
  wire_roles(gw, backend);
  CHECK(gw.has_role(AgentRole::Coding));
  CHECK_FALSE(gw.has_role(AgentRole::Supervisor));

  auto req = gw.build_request(AgentRole::Planning,
                              {{llm::MessageRole::User, "plan it"}});
  CHECK(req.model == "m-planning");
  CHECK(req.temperature == 0);
  CHECK(req.max_tokens == 2048);

  auto resp = gw.complete(AgentRole::Coding,
                          {{llm::MessageRole::User, "code it"}});
  CHECK(resp.content == "echo:m-coding");
  gw.complete(AgentRole::Retrieval, {{llm::MessageRole::User, "recall"}});

  auto ledger = gw.ledger();
  CHECK(ledger.calls == 2);
  CHECK(ledger.input_tokens == 200);
  CHECK(ledger.output_tokens == 100);
  CHECK(ledger.wall_time_ms == 14);
}

TEST_CASE("gateway raises ConfigError for unwired roles") {
  llm::Gateway gw;
  try {
    gw.complete(AgentRole::Supervisor, {{llm::MessageRole::User, "x"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("supervisor") != std::string::npos);
  }
}

TEST_CASE("role endpoint overrides flow into requests") {
  auto backend = std::make_shared<ScriptedBackend>(
      [](const llm::ChatRequest&) { return std::string("ok"); });
  llm::Gateway gw;
  llm::Gateway::RoleEndpoint ep;
  ep.backend = backend;
  ep.model = "special";
  ep.temperature = 0.3;
  ep.max_tokens = 99;
  gw.set_role(AgentRole::Debugging, ep);

  auto req = gw.build_request(AgentRole::Debugging, {});
  CHECK(req.model == "special");
  CHECK(req.temperature == doctest::Approx(0.3));
  CHECK(req.max_tokens == 99);
}

TEST_CASE("http backend completes against a live endpoint") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    StubServer::respond_ok(res, "from the wire");
  });
  llm::HttpBackend backend(server.base_url(), "sk-test", llm::RetryPolicy{},
                           "live");
  auto resp = backend.complete(sample_request("wire-model"));
  CHECK(resp.content == "from the wire");
  CHECK(resp.usage.prompt_tokens == 10);
  CHECK(resp.usage.completion_tokens == 5);
  CHECK(resp.backend_id == "live");
  CHECK(resp.latency_ms >= 0);
  CHECK(server.last_path() == "/v1/chat/completions");
  CHECK(server.last_auth() == "Bearer sk-test");
  auto body = json::parse(server.last_body());
  CHECK(body["model"] == "wire-model");
  CHECK(body["messages"].size() == 2);
  CHECK(body["messages"][1]["content"] == "solve it");
}

TEST_CASE("http backend honors a path prefix in the base url") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    StubServer::respond_ok(res, "prefixed");
  });
  llm::HttpBackend backend(server.base_url() + "/proxy/v2", "");
  auto resp = backend.complete(sample_request());
  CHECK(resp.content == "prefixed");
  CHECK(server.last_path() == "/proxy/v2/v1/chat/completions");
  CHECK(server.last_auth().empty());
}

TEST_CASE("http backend retries 5xx with backoff then succeeds") {
  std::atomic<int> failures_left{2};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (failures_left.fetch_sub(1) > 0) {
      res.status = 500;
      res.set_content("overloaded", "text/plain");
      return;
    }
    StubServer::respond_ok(res, "third time lucky");
  });
  llm::RetryPolicy quick{3, std::chrono::milliseconds(5)};
  llm::HttpBackend backend(server.base_url(), "", quick);
  auto resp = backend.complete(sample_request());
  CHECK(resp.content == "third time lucky");
  CHECK(server.hits() == 3);
}

TEST_CASE("http backend gives up after the retry budget") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("nope", "text/plain");
  });
  llm::RetryPolicy quick{2, std::chrono::milliseconds(2)};
  llm::HttpBackend backend(server.base_url(), "", quick);
  try {
    backend.complete(sample_request());
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(std::string(e.what()).find("HTTP 503") != std::string::npos);
  }
  CHECK(server.hits() == 3);  // initial attempt + 2 retries
}

TEST_CASE("http backend treats 4xx as non-retryable") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 404;
    res.set_content("missing", "text/plain");
  });
  llm::RetryPolicy quick{3, std::chrono::milliseconds(2)};
  llm::HttpBackend backend(server.base_url(), "", quick);
  CHECK_THROWS_AS(backend.complete(sample_request()), TransportError);
  CHECK(server.hits() == 1);
}

TEST_CASE("http backend rejects bodies without choices") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"usage\": {}}", "application/json");
  });
  llm::HttpBackend backend(server.base_url(), "");
  CHECK_THROWS_AS(backend.complete(sample_request()), TransportError);
}

TEST_CASE("default retry policy matches the documented contract") {
  llm::RetryPolicy policy;
  CHECK(policy.retry_limit == 3);
  CHECK(policy.base_delay == std::chrono::milliseconds(500));
}

TEST_CASE("chat message and response json round-trips") {
  llm::ChatMessage m{llm::MessageRole::Assistant, "done"};
  json jm = m;
  CHECK(jm["role"] == "assistant");
  CHECK(jm.get<llm::ChatMessage>() == m);

  auto resp = sample_response();
  json jr = resp;
  CHECK(jr.get<llm::ChatResponse>() == resp);

  auto req = sample_request();
  json jq = req;
  CHECK_FALSE(jq.contains("stop"));
  auto back = jq.get<llm::ChatRequest>();
  CHECK(back.model == req.model);
  CHECK(back.messages.size() == 2);
}
