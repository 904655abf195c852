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

#ifndef MAPFORGE_CORPUS_HPP_
#define MAPFORGE_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mapforge::corpus {

// One judged test: program stdin and the reference stdout. Expected output
// must be non-empty after normalization unless empty_output_ok is set.
struct TestCase {
  std::string input;
  std::string expected_output;
  bool empty_output_ok = false;

  bool operator==(const TestCase&) const = default;
};

// A contest task. Sample tests gate the in-pipeline debug loop; hidden tests
// determine the final verdict.
struct Problem {
  std::string id;
  std::string statement;
  std::vector<TestCase> sample_tests;
  std::vector<TestCase> hidden_tests;
  std::string language = "python";
  std::string source;
  double time_limit_s = 5.0;
  std::int64_t memory_limit_mb = 512;

  bool operator==(const Problem&) const = default;
};

struct BenchmarkManifest {
  std::string name;
  std::size_t problem_count = 0;
  std::vector<Problem> problems;

  bool operator==(const BenchmarkManifest&) const = default;
};

void to_json(nlohmann::json& j, const TestCase& t);
void from_json(const nlohmann::json& j, TestCase& t);
void to_json(nlohmann::json& j, const Problem& p);
void from_json(const nlohmann::json& j, Problem& p);

// Loads a canonical problem file (UTF-8, one JSON object per line). Loading
// is all-or-nothing: the first malformed record raises SchemaError with its
// line number and field; an unreadable path raises IoError. Problem order is
// preserved and problem_count is set.
BenchmarkManifest load_benchmark(const std::filesystem::path& path);

// Writes a manifest back to the canonical line-delimited format.
void write_benchmark(const BenchmarkManifest& manifest,
                     const std::filesystem::path& path);

// Total function: empty result iff all Problem invariants hold. Each
// violation names the field and the broken rule. Cross-problem rules
// (id uniqueness) are checked by load_benchmark.
std::vector<std::string> validate_problem(const Problem& p);

// Converts a source benchmark export into the canonical format. Adapters:
// "xcodeeval", "apps", "codecontests" (see README for the accepted source
// layouts). `language` fills records whose source lacks a language field.
BenchmarkManifest import_benchmark(std::string_view adapter,
                                   const std::filesystem::path& src,
                                   std::string_view language);

std::vector<std::string_view> known_adapters();

}  // namespace mapforge::corpus

#endif  // MAPFORGE_CORPUS_HPP_
