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

#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "mapforge/corpus.hpp"
#include "mapforge/errors.hpp"
#include "mapforge/sandbox.hpp"
#include "support/test_support.hpp"

using namespace mapforge;
using namespace mapforge::testing;
using nlohmann::json;

namespace {

corpus::Problem full_problem(std::string id) {
  corpus::Problem p;
  p.id = std::move(id);
  p.statement = "Read two ints, print their sum.\nLine two of the statement.";
  p.sample_tests = {{"1 2\n", "3\n", false}};
  p.hidden_tests = {{"5 7\n", "12\n", false}, {"0 0\n", "0\n", false}};
  p.language = "python";
  p.source = "unit";
  p.time_limit_s = 2.5;
  p.memory_limit_mb = 256;
  return p;
}

std::string record_line(const corpus::Problem& p) {
  json j = p;
  return j.dump();
}

}  // namespace

TEST_CASE("load_benchmark parses records and preserves order") {
  TempDir dir;
  auto path = dir / "mini.jsonl";
  std::string text = record_line(full_problem("p1")) + "\n" +
                     record_line(full_problem("p2")) + "\n" +
                     record_line(full_problem("p3")) + "\n";
  write_file(path, text);

  auto manifest = corpus::load_benchmark(path);
  CHECK(manifest.name == "mini");
  CHECK(manifest.problem_count == 3);
  REQUIRE(manifest.problems.size() == 3);
  CHECK(manifest.problems[0].id == "p1");
  CHECK(manifest.problems[1].id == "p2");
  CHECK(manifest.problems[2].id == "p3");
  CHECK(manifest.problems[0].time_limit_s == doctest::Approx(2.5));
  CHECK(manifest.problems[0].memory_limit_mb == 256);
  CHECK(manifest.problems[0].hidden_tests.size() == 2);
}

TEST_CASE("write_benchmark round trip yields an equal manifest") {
  TempDir dir;
  corpus::BenchmarkManifest manifest;
  manifest.name = "roundtrip";
  auto p = full_problem("tricky");
  p.statement = "Unicode \xE2\x88\x91 and \"quotes\" and\nnewlines\ttabs";
  p.sample_tests[0].input = "line1\r\nline2\n";
  p.hidden_tests.push_back({"x\n", "\n", true});
  manifest.problems = {p, full_problem("plain")};
  manifest.problem_count = 2;

  auto path = dir / "roundtrip.jsonl";
  corpus::write_benchmark(manifest, path);
  auto reread = corpus::load_benchmark(path);
  CHECK(reread == manifest);
}

TEST_CASE("empty file and blank lines") {
  TempDir dir;
  auto empty = dir / "empty.jsonl";
  write_file(empty, "");
  auto manifest = corpus::load_benchmark(empty);
  CHECK(manifest.problem_count == 0);
  CHECK(manifest.problems.empty());

  auto gaps = dir / "gaps.jsonl";
  write_file(gaps, "\n" + record_line(full_problem("a")) + "\n\n" +
                       record_line(full_problem("b")) + "\n");
  auto loaded = corpus::load_benchmark(gaps);
  CHECK(loaded.problem_count == 2);
}

TEST_CASE("missing key raises SchemaError with line and field") {
  TempDir dir;
  auto path = dir / "bad.jsonl";
  json j = full_problem("ok");
  std::string good = j.dump();
  j.erase("hidden_tests");
  write_file(path, good + "\n" + j.dump() + "\n");

  try {
    corpus::load_benchmark(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(e.field() == "hidden_tests");
  }
}

TEST_CASE("invalid JSON line raises SchemaError at its line") {
  TempDir dir;
  auto path = dir / "garbled.jsonl";
  write_file(path, record_line(full_problem("a")) + "\n{not json\n");
  try {
    corpus::load_benchmark(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(e.field() == "record");
  }
}

TEST_CASE("duplicate id rejected with the offending line") {
  TempDir dir;
  auto path = dir / "dup.jsonl";
  write_file(path, record_line(full_problem("p1")) + "\n" +
                       record_line(full_problem("p1")) + "\n");
  try {
    corpus::load_benchmark(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(e.field() == "id");
    CHECK(std::string(e.what()).find("duplicate problem id 'p1'") !=
          std::string::npos);
  }
}

TEST_CASE("unreadable path raises IoError") {
  CHECK_THROWS_AS(corpus::load_benchmark("/nonexistent/nowhere.jsonl"),
                  IoError);
}

TEST_CASE("validate_problem reports each broken invariant") {
  CHECK(corpus::validate_problem(full_problem("ok")).empty());

  auto no_id = full_problem("x");
  no_id.id.clear();
  auto v = corpus::validate_problem(no_id);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "id: must be non-empty");

  auto no_tests = full_problem("x");
  no_tests.sample_tests.clear();
  no_tests.hidden_tests.clear();
  v = corpus::validate_problem(no_tests);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "hidden_tests: must be non-empty when sample_tests is empty");

  auto sample_only = full_problem("x");
  sample_only.hidden_tests.clear();
  CHECK(corpus::validate_problem(sample_only).empty());

  auto zero_time = full_problem("x");
  zero_time.time_limit_s = 0;
  v = corpus::validate_problem(zero_time);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "time_limit_s: must be > 0");

  auto zero_mem = full_problem("x");
  zero_mem.memory_limit_mb = 0;
  v = corpus::validate_problem(zero_mem);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "memory_limit_mb: must be > 0");

  auto multi = full_problem("x");
  multi.id.clear();
  multi.time_limit_s = -1;
  CHECK(corpus::validate_problem(multi).size() == 2);
}

TEST_CASE("empty expected output needs the explicit marker") {
  auto p = full_problem("x");
  p.hidden_tests.push_back({"in\n", "  \n \n", false});
  auto v = corpus::validate_problem(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("hidden_tests: test 2") == 0);
  CHECK(v[0].find("empty_output_ok") != std::string::npos);

  p.hidden_tests.back().empty_output_ok = true;
  CHECK(corpus::validate_problem(p).empty());
}

TEST_CASE("loader rejects records that break invariants") {
  TempDir dir;
  auto path = dir / "inv.jsonl";
  json j = full_problem("x");
  j["time_limit_s"] = 0.0;
  write_file(path, j.dump() + "\n");
  try {
    corpus::load_benchmark(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 1);
    CHECK(e.field() == "time_limit_s");
  }
}

// Duplicate inputs with different expected outputs are legal: the judge
// checks every test independently, so such a problem is simply unwinnable
// on one of the two. Confirmed against the sandbox rather than asserted.
TEST_CASE("duplicate input with different outputs is legal and judged per test") {
  auto p = full_problem("dup-input");
  p.language = "sh";
  p.sample_tests.clear();
  p.hidden_tests = {{"a\n", "x\n", false}, {"a\n", "y\n", false}};
  CHECK(corpus::validate_problem(p).empty());

  sandbox::ExecutionLimits limits;
  limits.time_limit_s = 5.0;
  auto report = sandbox::run_tests("echo x\n", "sh", p.hidden_tests, limits,
                                   sh_toolchains());
  REQUIRE(report.per_test.size() == 2);
  CHECK(report.per_test[0].verdict == sandbox::Verdict::Accepted);
  CHECK(report.per_test[1].verdict == sandbox::Verdict::WrongAnswer);
  CHECK(report.overall == sandbox::Verdict::WrongAnswer);
}

TEST_CASE("test case json omits empty_output_ok unless set") {
  corpus::TestCase plain{"in\n", "out\n", false};
  json j = plain;
  CHECK(j.contains("input"));
  CHECK(j.contains("output"));
  CHECK_FALSE(j.contains("empty_output_ok"));

  corpus::TestCase marked{"in\n", "", true};
  json jm = marked;
  CHECK(jm["empty_output_ok"] == true);
  corpus::TestCase back = jm.get<corpus::TestCase>();
  CHECK(back == marked);
}

TEST_CASE("xcodeeval adapter maps the export layout") {
  TempDir dir;
  auto src = dir / "xc.jsonl";
  json rec = {
      {"src_uid", "u123"},
      {"description", "Count the pairs."},
      {"input_spec", "One line of integers."},
      {"output_spec", "One integer."},
      {"sample_inputs", {"1 2 2\n"}},
      {"sample_outputs", {"1\n"}},
      {"unittests", json::array({{{"input", "3 3 3\n"}, {"output", "3\n"}}})},
      {"lang", "cpp"},
      {"time_limit_s", 1.0},
      {"memory_limit_mb", 64},
  };
  write_file(src, rec.dump() + "\n");

  auto manifest = corpus::import_benchmark("xcodeeval", src, "python");
  CHECK(manifest.name == "xcodeeval");
  REQUIRE(manifest.problem_count == 1);
  const auto& p = manifest.problems[0];
  CHECK(p.id == "u123");
  CHECK(p.source == "xcodeeval");
  CHECK(p.statement ==
        "Count the pairs.\n\nInput\nOne line of integers.\n\nOutput\nOne "
        "integer.");
  REQUIRE(p.sample_tests.size() == 1);
  CHECK(p.sample_tests[0].input == "1 2 2\n");
  CHECK(p.sample_tests[0].expected_output == "1\n");
  REQUIRE(p.hidden_tests.size() == 1);
  CHECK(p.hidden_tests[0].input == "3 3 3\n");
  CHECK(p.language == "cpp");
  CHECK(p.time_limit_s == doctest::Approx(1.0));
  CHECK(p.memory_limit_mb == 64);
}

TEST_CASE("xcodeeval adapter falls back to the given language") {
  TempDir dir;
  auto src = dir / "xc.jsonl";
  json rec = {
      {"src_uid", "u1"},
      {"description", "Task."},
      {"unittests", json::array({{{"input", "a\n"}, {"output", "b\n"}}})},
  };
  write_file(src, rec.dump() + "\n");
  auto manifest = corpus::import_benchmark("xcodeeval", src, "python");
  CHECK(manifest.problems[0].language == "python");
  CHECK(manifest.problems[0].time_limit_s == doctest::Approx(5.0));
  CHECK(manifest.problems[0].memory_limit_mb == 512);
}

TEST_CASE("apps adapter: numeric ids, first test becomes the sample") {
  TempDir dir;
  auto src = dir / "apps.jsonl";
  json rec = {
      {"id", 42},
      {"question", "Do the thing."},
      {"input_output",
       {{"inputs", {"a\n", "b\n", "c\n"}}, {"outputs", {"1\n", "2\n", "3\n"}}}},
  };
  write_file(src, rec.dump() + "\n");

  auto manifest = corpus::import_benchmark("apps", src, "python");
  const auto& p = manifest.problems[0];
  CHECK(p.id == "42");
  CHECK(p.source == "apps");
  REQUIRE(p.sample_tests.size() == 1);
  CHECK(p.sample_tests[0].input == "a\n");
  REQUIRE(p.hidden_tests.size() == 2);
  CHECK(p.hidden_tests[0].input == "b\n");
  CHECK(p.hidden_tests[1].input == "c\n");
}

TEST_CASE("apps adapter: string-encoded input_output and single test") {
  TempDir dir;
  auto src = dir / "apps.jsonl";
  json io = {{"inputs", {"only\n"}}, {"outputs", {"one\n"}}};
  json rec = {{"problem_id", "apps-7"},
              {"question", "Solo test."},
              {"input_output", io.dump()}};
  write_file(src, rec.dump() + "\n");

  auto manifest = corpus::import_benchmark("apps", src, "python");
  const auto& p = manifest.problems[0];
  CHECK(p.id == "apps-7");
  REQUIRE(p.sample_tests.size() == 1);
  REQUIRE(p.hidden_tests.size() == 1);
  CHECK(p.hidden_tests[0] == p.sample_tests[0]);
}

TEST_CASE("codecontests adapter maps tests and limits") {
  TempDir dir;
  auto src = dir / "cc.jsonl";
  json rec = {
      {"name", "1575_A"},
      {"description", "Sort the table."},
      {"public_tests", {{"input", {"2\nab\nba\n"}}, {"output", {"1 2\n"}}}},
      {"private_tests",
       {{"input", {"1\nz\n", "2\nzz\nzz\n"}}, {"output", {"1\n", "1 2\n"}}}},
      {"time_limit", {{"seconds", 2}}},
      {"memory_limit_bytes", 268435456},
  };
  write_file(src, rec.dump() + "\n");

  auto manifest = corpus::import_benchmark("codecontests", src, "python");
  const auto& p = manifest.problems[0];
  CHECK(p.id == "1575_A");
  CHECK(p.source == "codecontests");
  CHECK(p.sample_tests.size() == 1);
  CHECK(p.hidden_tests.size() == 2);
  CHECK(p.time_limit_s == doctest::Approx(2.0));
  CHECK(p.memory_limit_mb == 256);
}

TEST_CASE("codecontests memory limit never drops below one megabyte") {
  TempDir dir;
  auto src = dir / "cc.jsonl";
  json rec = {
      {"name", "tiny"},
      {"description", "Task."},
      {"public_tests", {{"input", {"a\n"}}, {"output", {"b\n"}}}},
      {"memory_limit_bytes", 1024},
  };
  write_file(src, rec.dump() + "\n");
  auto manifest = corpus::import_benchmark("codecontests", src, "python");
  CHECK(manifest.problems[0].memory_limit_mb == 1);
}

TEST_CASE("unknown adapter raises ConfigError") {
  TempDir dir;
  auto src = dir / "x.jsonl";
  write_file(src, "{}\n");
  try {
    corpus::import_benchmark("leetcode", src, "python");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("unknown import adapter: leetcode") !=
          std::string::npos);
  }
}

TEST_CASE("imported record that violates invariants raises SchemaError") {
  TempDir dir;
  auto src = dir / "xc.jsonl";
  json rec = {{"src_uid", "u1"}, {"description", "No tests at all."}};
  write_file(src, rec.dump() + "\n");
  try {
    corpus::import_benchmark("xcodeeval", src, "python");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "record");
    CHECK(std::string(e.what()).find("imported record invalid") !=
          std::string::npos);
  }
}

TEST_CASE("known_adapters lists the three importers") {
  auto adapters = corpus::known_adapters();
  REQUIRE(adapters.size() == 3);
  CHECK(adapters[0] == "xcodeeval");
  CHECK(adapters[1] == "apps");
  CHECK(adapters[2] == "codecontests");
}
