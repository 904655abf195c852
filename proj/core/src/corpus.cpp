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

#include "mapforge/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mapforge/errors.hpp"
#include "mapforge/sandbox.hpp"

namespace mapforge::corpus {

using nlohmann::json;

void to_json(json& j, const TestCase& t) {
  j = json{{"input", t.input}, {"output", t.expected_output}};
  if (t.empty_output_ok) {
    j["empty_output_ok"] = true;
  }
}

void from_json(const json& j, TestCase& t) {
  j.at("input").get_to(t.input);
  j.at("output").get_to(t.expected_output);
  t.empty_output_ok = j.value("empty_output_ok", false);
}

void to_json(json& j, const Problem& p) {
  j = json{{"id", p.id},
           {"statement", p.statement},
           {"sample_tests", p.sample_tests},
           {"hidden_tests", p.hidden_tests},
           {"language", p.language},
           {"source", p.source},
           {"time_limit_s", p.time_limit_s},
           {"memory_limit_mb", p.memory_limit_mb}};
}

void from_json(const json& j, Problem& p) {
  j.at("id").get_to(p.id);
  j.at("statement").get_to(p.statement);
  j.at("sample_tests").get_to(p.sample_tests);
  j.at("hidden_tests").get_to(p.hidden_tests);
  j.at("language").get_to(p.language);
  j.at("source").get_to(p.source);
  j.at("time_limit_s").get_to(p.time_limit_s);
  j.at("memory_limit_mb").get_to(p.memory_limit_mb);
}

namespace {

constexpr const char* kProblemKeys[] = {
    "id",       "statement", "sample_tests",  "hidden_tests",
    "language", "source",    "time_limit_s",  "memory_limit_mb"};

// Maps a json exception to the field it complains about, best effort.
std::string offending_field(const json& record) {
  for (const char* key : kProblemKeys) {
    if (!record.contains(key)) {
      return key;
    }
  }
  return "record";
}

Problem parse_record(const json& record, std::size_t line_no) {
  if (!record.is_object()) {
    throw SchemaError(line_no, "record", "not a JSON object");
  }
  for (const char* key : kProblemKeys) {
    if (!record.contains(key)) {
      throw SchemaError(line_no, key, "missing key");
    }
  }
  Problem p;
  try {
    record.get_to(p);
  } catch (const std::exception& e) {
    throw SchemaError(line_no, offending_field(record), e.what());
  }
  const auto violations = validate_problem(p);
  if (!violations.empty()) {
    // Violation strings start with the field name.
    const std::string& v = violations.front();
    const auto colon = v.find(':');
    throw SchemaError(line_no, v.substr(0, colon), v);
  }
  return p;
}

}  // namespace

BenchmarkManifest load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read benchmark file: " + path.string());
  }
  BenchmarkManifest manifest;
  manifest.name = path.stem().string();

  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      throw SchemaError(line_no, "record", "invalid JSON");
    }
    Problem p = parse_record(record, line_no);
    if (!seen_ids.insert(p.id).second) {
      throw SchemaError(line_no, "id", "duplicate problem id '" + p.id + "'");
    }
    manifest.problems.push_back(std::move(p));
  }
  manifest.problem_count = manifest.problems.size();
  return manifest;
}

void write_benchmark(const BenchmarkManifest& manifest,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write benchmark file: " + path.string());
  }
  for (const Problem& p : manifest.problems) {
    out << json(p).dump() << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

std::vector<std::string> validate_problem(const Problem& p) {
  std::vector<std::string> violations;
  if (p.id.empty()) {
    violations.push_back("id: must be non-empty");
  }
  if (p.sample_tests.empty() && p.hidden_tests.empty()) {
    violations.push_back(
        "hidden_tests: must be non-empty when sample_tests is empty");
  }
  if (p.time_limit_s <= 0) {
    violations.push_back("time_limit_s: must be > 0");
  }
  if (p.memory_limit_mb <= 0) {
    violations.push_back("memory_limit_mb: must be > 0");
  }
  auto check_tests = [&](const std::vector<TestCase>& tests,
                         const char* field) {
    for (std::size_t i = 0; i < tests.size(); ++i) {
      const TestCase& t = tests[i];
      if (!t.empty_output_ok &&
          sandbox::normalize_output(t.expected_output).empty()) {
        violations.push_back(std::string(field) + ": test " +
                             std::to_string(i) +
                             " has empty expected output and is not marked "
                             "empty_output_ok");
      }
    }
  };
  check_tests(p.sample_tests, "sample_tests");
  check_tests(p.hidden_tests, "hidden_tests");
  return violations;
}

namespace {

std::vector<json> read_source_records(const std::filesystem::path& src) {
  std::ifstream in(src, std::ios::binary);
  if (!in) {
    throw IoError("cannot read source file: " + src.string());
  }
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw SchemaError(line_no, "record", "invalid JSON in source file");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string get_string(const json& j, std::initializer_list<const char*> keys,
                       const std::string& fallback = {}) {
  for (const char* key : keys) {
    if (j.contains(key) && j[key].is_string()) {
      return j[key].get<std::string>();
    }
  }
  return fallback;
}

// Parallel input/output string arrays into test cases.
std::vector<TestCase> zip_tests(const json& inputs, const json& outputs) {
  std::vector<TestCase> tests;
  if (!inputs.is_array() || !outputs.is_array()) {
    return tests;
  }
  const std::size_t n = std::min(inputs.size(), outputs.size());
  for (std::size_t i = 0; i < n; ++i) {
    tests.push_back(TestCase{inputs[i].get<std::string>(),
                             outputs[i].get<std::string>()});
  }
  return tests;
}

// xCodeEval program-synthesis export: one JSON object per line with
// "src_uid" (or "id"), "description", sample arrays "sample_inputs" /
// "sample_outputs", and hidden tests as "unittests": [{input, output}].
Problem import_xcodeeval_record(const json& r, std::size_t line_no,
                                std::string_view language) {
  Problem p;
  p.source = "xcodeeval";
  p.id = get_string(r, {"src_uid", "id"});
  if (p.id.empty()) {
    throw SchemaError(line_no, "src_uid", "missing problem id");
  }
  std::ostringstream statement;
  statement << get_string(r, {"description", "statement"});
  const std::string input_spec = get_string(r, {"input_spec"});
  const std::string output_spec = get_string(r, {"output_spec"});
  if (!input_spec.empty()) {
    statement << "\n\nInput\n" << input_spec;
  }
  if (!output_spec.empty()) {
    statement << "\n\nOutput\n" << output_spec;
  }
  p.statement = statement.str();
  if (r.contains("sample_inputs") && r.contains("sample_outputs")) {
    p.sample_tests = zip_tests(r["sample_inputs"], r["sample_outputs"]);
  }
  if (r.contains("unittests") && r["unittests"].is_array()) {
    for (const json& t : r["unittests"]) {
      p.hidden_tests.push_back(TestCase{t.value("input", std::string()),
                                        t.value("output", std::string())});
    }
  }
  p.language = get_string(r, {"lang"}, std::string(language));
  if (r.contains("time_limit_s") && r["time_limit_s"].is_number()) {
    p.time_limit_s = r["time_limit_s"].get<double>();
  }
  if (r.contains("memory_limit_mb") && r["memory_limit_mb"].is_number()) {
    p.memory_limit_mb = r["memory_limit_mb"].get<std::int64_t>();
  }
  return p;
}

// APPS export: one JSON object per line with "id" (or "problem_id"),
// "question", and "input_output": {"inputs": [...], "outputs": [...]}.
// APPS has no sample/hidden split; the first test becomes the sample.
Problem import_apps_record(const json& r, std::size_t line_no,
                           std::string_view language) {
  Problem p;
  p.source = "apps";
  if (r.contains("id") && r["id"].is_number()) {
    p.id = std::to_string(r["id"].get<std::int64_t>());
  } else {
    p.id = get_string(r, {"id", "problem_id"});
  }
  if (p.id.empty()) {
    throw SchemaError(line_no, "id", "missing problem id");
  }
  p.statement = get_string(r, {"question", "statement"});
  p.language = std::string(language);
  std::vector<TestCase> all;
  if (r.contains("input_output")) {
    json io = r["input_output"];
    if (io.is_string()) {
      io = json::parse(io.get<std::string>(), nullptr, false);
    }
    if (io.is_object()) {
      all = zip_tests(io.value("inputs", json::array()),
                      io.value("outputs", json::array()));
    }
  }
  if (!all.empty()) {
    p.sample_tests.push_back(all.front());
    p.hidden_tests.assign(all.begin() + 1, all.end());
    if (p.hidden_tests.empty()) {
      // Single-test problems still need a hidden verdict.
      p.hidden_tests.push_back(all.front());
    }
  }
  return p;
}

// CodeContests export: one JSON object per line with "name", "description",
// "public_tests" / "private_tests": {"input": [...], "output": [...]} and
// optional "time_limit" {"seconds"} / "memory_limit_bytes".
Problem import_codecontests_record(const json& r, std::size_t line_no,
                                   std::string_view language) {
  Problem p;
  p.source = "codecontests";
  p.id = get_string(r, {"name", "id"});
  if (p.id.empty()) {
    throw SchemaError(line_no, "name", "missing problem id");
  }
  p.statement = get_string(r, {"description", "statement"});
  p.language = std::string(language);
  if (r.contains("public_tests") && r["public_tests"].is_object()) {
    p.sample_tests = zip_tests(r["public_tests"].value("input", json::array()),
                               r["public_tests"].value("output", json::array()));
  }
  if (r.contains("private_tests") && r["private_tests"].is_object()) {
    p.hidden_tests =
        zip_tests(r["private_tests"].value("input", json::array()),
                  r["private_tests"].value("output", json::array()));
  }
  if (r.contains("time_limit") && r["time_limit"].is_object() &&
      r["time_limit"].contains("seconds")) {
    p.time_limit_s = r["time_limit"]["seconds"].get<double>();
  }
  if (r.contains("memory_limit_bytes") && r["memory_limit_bytes"].is_number()) {
    p.memory_limit_mb =
        std::max<std::int64_t>(1, r["memory_limit_bytes"].get<std::int64_t>() /
                                      (1024 * 1024));
  }
  return p;
}

}  // namespace

std::vector<std::string_view> known_adapters() {
  return {"xcodeeval", "apps", "codecontests"};
}

BenchmarkManifest import_benchmark(std::string_view adapter,
                                   const std::filesystem::path& src,
                                   std::string_view language) {
  Problem (*convert)(const json&, std::size_t, std::string_view) = nullptr;
  if (adapter == "xcodeeval") {
    convert = import_xcodeeval_record;
  } else if (adapter == "apps") {
    convert = import_apps_record;
  } else if (adapter == "codecontests") {
    convert = import_codecontests_record;
  } else {
    throw ConfigError("unknown import adapter: " + std::string(adapter));
  }

  BenchmarkManifest manifest;
  manifest.name = std::string(adapter);
  const auto records = read_source_records(src);
  std::size_t line_no = 0;
  for (const json& record : records) {
    ++line_no;
    Problem p = convert(record, line_no, language);
    const auto violations = validate_problem(p);
    if (!violations.empty()) {
      throw SchemaError(line_no, "record",
                        "imported record invalid: " + violations.front());
    }
    manifest.problems.push_back(std::move(p));
  }
  manifest.problem_count = manifest.problems.size();
  return manifest;
}

}  // namespace mapforge::corpus
