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

#ifndef MAPFORGE_SANDBOX_HPP_
#define MAPFORGE_SANDBOX_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mapforge::corpus {
struct TestCase;
struct Problem;
}  // namespace mapforge::corpus

namespace mapforge::sandbox {

struct ExecutionLimits {
  double time_limit_s = 5.0;
  std::int64_t memory_limit_mb = 512;
  std::int64_t output_limit_kb = 64;
};

enum class Verdict {
  Accepted,
  WrongAnswer,
  RuntimeError,
  CompileError,
  TimeLimit,
  MemoryLimit,
  OutputLimit,
};

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view name);

void to_json(nlohmann::json& j, const ExecutionLimits& l);
void from_json(const nlohmann::json& j, ExecutionLimits& l);

enum class TestScope { Sample, Hidden };

struct TestResult {
  Verdict verdict = Verdict::RuntimeError;
  std::string stdout_text;  // truncated to output_limit
  std::string stderr_text;  // truncated
  std::chrono::milliseconds elapsed{0};
  TestScope scope = TestScope::Sample;
};

struct ExecutionReport {
  std::vector<TestResult> per_test;
  Verdict overall = Verdict::RuntimeError;
  bool compiled = false;
  std::string compile_log;  // compiler stderr, kept on CompileError
};

enum class JudgeScope { SampleOnly, HiddenOnly, All };

// Per-language toolchain. compile_cmd may be empty for interpreted
// languages. Templates take {src} and {bin} placeholders and run via sh -c
// inside the per-run temp directory.
struct Toolchain {
  std::string compile_cmd;
  std::string run_cmd;
  std::string file_ext;
};

using ToolchainMap = std::map<std::string, Toolchain, std::less<>>;

// python (python3) and cpp (g++ -O2).
ToolchainMap default_toolchains();

// Judging comparator: strip trailing whitespace on every line, drop trailing
// blank lines, CRLF -> LF, then byte-equality.
std::string normalize_output(std::string_view text);
bool compare_output(std::string_view actual, std::string_view expected);

// Compiles once (for compiled languages) and runs every test in an isolated
// child process: stdin from the test input, scrubbed environment, wall-clock
// and address-space limits enforced, hard kill at the limit. Results are in
// input order; execution stops early only on CompileError. Throws
// ToolchainMissing when `language` has no toolchain entry.
ExecutionReport run_tests(const std::string& source,
                          const std::string& language,
                          const std::vector<corpus::TestCase>& tests,
                          const ExecutionLimits& limits,
                          const ToolchainMap& toolchains = default_toolchains());

// run_tests over sample + hidden with scope tags retained, for aggregate().
ExecutionReport judge_problem(const std::string& source,
                              const corpus::Problem& problem,
                              const ExecutionLimits& limits,
                              const ToolchainMap& toolchains = default_toolchains());

// Overall verdict restricted to the selected scope: Accepted iff every
// in-scope test is accepted; otherwise the first failing verdict. Throws
// EmptyScope when the scope selects zero tests. CompileError reports apply
// to every scope.
Verdict aggregate(const ExecutionReport& report, JudgeScope scope);

}  // namespace mapforge::sandbox

#endif  // MAPFORGE_SANDBOX_HPP_
