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

#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "mapforge/digest.hpp"
#include "mapforge/emitter.hpp"
#include "mapforge/errors.hpp"
#include "support/test_support.hpp"

using namespace mapforge;
using namespace mapforge::testing;
using nlohmann::json;

namespace {

curation::TrainingExample example_for(AgentRole role, std::string id) {
  curation::TrainingExample ex;
  ex.role = role;
  ex.input = {{llm::MessageRole::User, "prompt for " + id}};
  ex.output = "output for " + id;
  ex.provenance = curation::Provenance::Distilled;
  ex.problem_id = std::move(id);
  ex.source_model = "teacher-v1";
  return ex;
}

}  // namespace

TEST_CASE("sha256_hex matches the published test vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("sha256_file_hex hashes file bytes") {
  TempDir dir;
  auto path = dir / "abc.txt";
  write_file(path, "abc");
  CHECK(sha256_file_hex(path) == sha256_hex("abc"));
  CHECK_THROWS_AS(sha256_file_hex(dir / "missing"), IoError);
}

TEST_CASE("write_corpus writes one record per line with a final newline") {
  TempDir dir;
  auto path = dir / "retrieval.jsonl";
  std::vector<curation::TrainingExample> examples = {
      example_for(AgentRole::Retrieval, "p1"),
      example_for(AgentRole::Retrieval, "p2"),
      example_for(AgentRole::Retrieval, "p3"),
  };
  auto count = emitter::write_corpus(examples, AgentRole::Retrieval, path);
  CHECK(count == 3);

  auto text = read_file(path);
  CHECK(text.back() == '\n');
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  auto loaded = emitter::load_corpus(path);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded == examples);
}

TEST_CASE("write_corpus with zero examples leaves an empty corpus") {
  TempDir dir;
  auto path = dir / "empty.jsonl";
  CHECK(emitter::write_corpus({}, AgentRole::Coding, path) == 0);
  CHECK(read_file(path).empty());
  CHECK(emitter::load_corpus(path).empty());
}

TEST_CASE("write_corpus rejects mixed roles before writing anything") {
  TempDir dir;
  auto path = dir / "mixed.jsonl";
  std::vector<curation::TrainingExample> examples = {
      example_for(AgentRole::Coding, "p1"),
      example_for(AgentRole::Planning, "p2"),
  };
  try {
    emitter::write_corpus(examples, AgentRole::Coding, path);
    FAIL("expected RoleMismatchError");
  } catch (const RoleMismatchError& e) {
    std::string what = e.what();
    CHECK(what.find("coding") != std::string::npos);
    CHECK(what.find("planning") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(path));
}

TEST_CASE("load_corpus reports the malformed line") {
  TempDir dir;
  auto path = dir / "broken.jsonl";
  json good = example_for(AgentRole::Coding, "p1");
  write_file(path, good.dump() + "\n{oops\n");
  try {
    emitter::load_corpus(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("manifest defaults match the training configuration") {
  TempDir dir;
  auto corpus = dir / "coding.jsonl";
  emitter::write_corpus({example_for(AgentRole::Coding, "p1")},
                        AgentRole::Coding, corpus);

  auto m = emitter::make_manifest(AgentRole::Coding, corpus);
  CHECK(m.role == AgentRole::Coding);
  CHECK(m.adapter_rank == 32);
  REQUIRE(m.target_projections.size() == 4);
  CHECK(m.target_projections[0] == emitter::Projection::Query);
  CHECK(m.target_projections[1] == emitter::Projection::Key);
  CHECK(m.target_projections[2] == emitter::Projection::Value);
  CHECK(m.target_projections[3] == emitter::Projection::Output);
  CHECK(m.learning_rate == 2e-5);
  CHECK(m.gradient_accumulation == 16);
  CHECK(m.epochs == 3);
  CHECK_FALSE(m.tuned);
  CHECK(m.corpus_path == corpus.string());
  CHECK(m.corpus_digest == sha256_file_hex(corpus));
}

TEST_CASE("manifest overrides replace only what they name") {
  TempDir dir;
  auto corpus = dir / "coding.jsonl";
  emitter::write_corpus({example_for(AgentRole::Coding, "p1")},
                        AgentRole::Coding, corpus);

  emitter::ManifestOverrides overrides;
  overrides.base_model = "small-7b";
  overrides.adapter_rank = 8;
  overrides.target_projections = std::vector<emitter::Projection>{
      emitter::Projection::Query, emitter::Projection::Value};
  overrides.learning_rate = 1e-4;
  overrides.tuned = true;
  auto m = emitter::make_manifest(AgentRole::Coding, corpus, overrides);
  CHECK(m.base_model == "small-7b");
  CHECK(m.adapter_rank == 8);
  CHECK(m.target_projections.size() == 2);
  CHECK(m.learning_rate == 1e-4);
  CHECK(m.gradient_accumulation == 16);
  CHECK(m.epochs == 3);
  CHECK(m.tuned);
}

TEST_CASE("make_manifest requires a readable corpus") {
  TempDir dir;
  CHECK_THROWS_AS(emitter::make_manifest(AgentRole::Coding, dir / "nope.jsonl"),
                  IoError);
}

TEST_CASE("manifest json round-trips") {
  TempDir dir;
  auto corpus = dir / "planning.jsonl";
  emitter::write_corpus({example_for(AgentRole::Planning, "p1")},
                        AgentRole::Planning, corpus);
  auto m = emitter::make_manifest(AgentRole::Planning, corpus);
  m.base_model = "base-13b";

  auto path = dir / "planning.manifest.json";
  emitter::write_manifest(m, path);
  auto back = emitter::load_manifest(path);
  CHECK(back == m);

  auto j = json::parse(read_file(path));
  CHECK(j["role"] == "planning");
  CHECK(j["adapter_rank"] == 32);
  CHECK(j["target_projections"] ==
        json::array({"query", "key", "value", "output"}));
}

TEST_CASE("verify_manifest accepts an intact corpus and names what broke") {
  TempDir dir;
  auto corpus = dir / "debugging.jsonl";
  emitter::write_corpus({example_for(AgentRole::Debugging, "p1"),
                         example_for(AgentRole::Debugging, "p2")},
                        AgentRole::Debugging, corpus);
  auto m = emitter::make_manifest(AgentRole::Debugging, corpus);
  auto manifest_path = dir / "debugging.manifest.json";
  emitter::write_manifest(m, manifest_path);

  std::string reason;
  CHECK(emitter::verify_manifest(manifest_path, &reason));
  CHECK(reason.empty());

  SUBCASE("one flipped byte in the corpus is detected") {
    auto bytes = read_file(corpus);
    auto mid = bytes.size() / 2;
    bytes[mid] = bytes[mid] == 'x' ? 'y' : 'x';
    write_file(corpus, bytes);
    CHECK_FALSE(emitter::verify_manifest(manifest_path, &reason));
    CHECK(reason.find("digest mismatch") != std::string::npos);
  }
  SUBCASE("a missing corpus is detected") {
    fs::remove(corpus);
    CHECK_FALSE(emitter::verify_manifest(manifest_path, &reason));
    CHECK_FALSE(reason.empty());
  }
  SUBCASE("invariant violations are detected") {
    auto j = json::parse(read_file(manifest_path));
    j["adapter_rank"] = 0;
    write_file(manifest_path, j.dump());
    CHECK_FALSE(emitter::verify_manifest(manifest_path, &reason));
    CHECK(reason == "adapter_rank must be positive");

    j["adapter_rank"] = 32;
    j["target_projections"] = json::array();
    write_file(manifest_path, j.dump());
    CHECK_FALSE(emitter::verify_manifest(manifest_path, &reason));
    CHECK(reason == "target_projections is empty");
  }
  SUBCASE("a relative corpus path resolves against the manifest directory") {
    auto j = json::parse(read_file(manifest_path));
    j["corpus_path"] = "debugging.jsonl";
    write_file(manifest_path, j.dump());
    CHECK(emitter::verify_manifest(manifest_path, &reason));
  }
  SUBCASE("an unreadable manifest is a reason, not a crash") {
    write_file(manifest_path, "{broken");
    CHECK_FALSE(emitter::verify_manifest(manifest_path, &reason));
    CHECK_FALSE(reason.empty());
  }
}

TEST_CASE("verify_manifest works without a reason out-param") {
  TempDir dir;
  auto corpus = dir / "c.jsonl";
  emitter::write_corpus({}, AgentRole::Coding, corpus);
  auto m = emitter::make_manifest(AgentRole::Coding, corpus);
  auto path = dir / "m.json";
  emitter::write_manifest(m, path);
  CHECK(emitter::verify_manifest(path));
}

TEST_CASE("projection names round-trip") {
  using P = emitter::Projection;
  for (P p : {P::Query, P::Key, P::Value, P::Output}) {
    auto name = emitter::to_string(p);
    auto back = emitter::projection_from_string(name);
    REQUIRE(back.has_value());
    CHECK(*back == p);
  }
  CHECK_FALSE(emitter::projection_from_string("gate").has_value());
}
