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

#include "mapforge/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "mapforge/corpus.hpp"
#include "mapforge/errors.hpp"

namespace mapforge::prompts {

namespace {

constexpr std::string_view kRetrievalDefault =
    R"(You are the retrieval agent of a competitive programming solver.
Recall one algorithm relevant to the problem below and explain it briefly.

Problem:
{statement}

Respond with exactly this XML structure and nothing else:
{schema}
)";

constexpr std::string_view kPlanningDefault =
    R"(You are the planning agent of a competitive programming solver.
Using the retrieved algorithm, write up to {plan_count} alternative step-wise
plans for solving the problem. Give each plan an integer confidence from 0
to 100.

Problem:
{statement}

Retrieved algorithm: {algorithm}
Tutorial:
{tutorial}

Respond with exactly this XML structure and nothing else:
{schema}
)";

constexpr std::string_view kCodingDefault =
    R"(You are the coding agent of a competitive programming solver.
Write a complete {language} program that reads from standard input and
writes to standard output, following the plan exactly.

Problem:
{statement}

Algorithm: {algorithm}
Plan:
{plan}

Respond with a single fenced {language} code block containing the full
program and nothing else.
)";

constexpr std::string_view kDebuggingDefault =
    R"(You are the debugging agent of a competitive programming solver.
The program below fails a sample test. Correct the program while keeping
the same overall plan.

Problem:
{statement}

Plan:
{plan}

Current program:
```{language}
{code}
```

Failing test:
{failed_test}

Respond with a single fenced {language} code block containing the full
corrected program and nothing else.
)";

constexpr std::string_view kSupervisorDefault =
    R"(You audit a failed run of a four-agent competitive programming solver
(retrieval, planning, coding, debugging). Inspect the problem, the agent
outputs, and the failing tests, then identify which upstream agent
(retrieval, planning, or coding) is primarily responsible for the failure
and give targeted feedback for regenerating that agent's output.

Problem:
{statement}

Retrieval output:
{retrieval_xml}

Plan used:
{plan}

Final program:
```{language}
{code}
```

Failing tests:
{failed_tests}

Respond with exactly this XML structure and nothing else:
{schema}
)";

std::string role_file(AgentRole role) {
  return std::string(to_string(role)) + ".txt";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read template: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write template: " + path.string());
  }
  out << text;
}

std::vector<llm::ChatMessage> user_message(std::string text) {
  return {llm::ChatMessage{llm::MessageRole::User, std::move(text)}};
}

}  // namespace

FailingTest failing_test_from(const corpus::TestCase& test,
                              const sandbox::TestResult& result) {
  FailingTest out;
  out.input = test.input;
  out.expected = test.expected_output;
  out.actual = result.stdout_text;
  out.stderr_text = result.stderr_text;
  out.verdict = std::string(sandbox::to_string(result.verdict));
  return out;
}

std::string format_failing_test(const FailingTest& test) {
  std::string out;
  out += "verdict: " + test.verdict + "\n";
  out += "input:\n" + test.input;
  if (!test.input.empty() && test.input.back() != '\n') out += "\n";
  out += "expected output:\n" + test.expected;
  if (!test.expected.empty() && test.expected.back() != '\n') out += "\n";
  out += "actual output:\n" + test.actual;
  if (!test.actual.empty() && test.actual.back() != '\n') out += "\n";
  if (!test.stderr_text.empty()) {
    out += "stderr:\n" + test.stderr_text;
    if (test.stderr_text.back() != '\n') out += "\n";
  }
  return out;
}

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.retrieval = std::string(kRetrievalDefault);
  t.planning = std::string(kPlanningDefault);
  t.coding = std::string(kCodingDefault);
  t.debugging = std::string(kDebuggingDefault);
  t.supervisor = std::string(kSupervisorDefault);
  return t;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
  PromptTemplates t = defaults();
  const auto maybe = [&](AgentRole role, std::string& slot) {
    const auto path = dir / role_file(role);
    if (std::filesystem::exists(path)) {
      slot = read_file(path);
    }
  };
  maybe(AgentRole::Retrieval, t.retrieval);
  maybe(AgentRole::Planning, t.planning);
  maybe(AgentRole::Coding, t.coding);
  maybe(AgentRole::Debugging, t.debugging);
  maybe(AgentRole::Supervisor, t.supervisor);
  return t;
}

void PromptTemplates::save_dir(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file(dir / role_file(AgentRole::Retrieval), retrieval);
  write_file(dir / role_file(AgentRole::Planning), planning);
  write_file(dir / role_file(AgentRole::Coding), coding);
  write_file(dir / role_file(AgentRole::Debugging), debugging);
  write_file(dir / role_file(AgentRole::Supervisor), supervisor);
}

const std::string& PromptTemplates::for_role(AgentRole role) const {
  switch (role) {
    case AgentRole::Retrieval:
      return retrieval;
    case AgentRole::Planning:
      return planning;
    case AgentRole::Coding:
      return coding;
    case AgentRole::Debugging:
      return debugging;
    case AgentRole::Supervisor:
      return supervisor;
  }
  return retrieval;
}

std::string render(std::string_view tmpl,
                   const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] != '{') {
      out.push_back(tmpl[i]);
      ++i;
      continue;
    }
    const std::size_t close = tmpl.find('}', i + 1);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    const std::string name(tmpl.substr(i + 1, close - i - 1));
    const auto it = values.find(name);
    if (it == values.end()) {
      out.append(tmpl.substr(i, close - i + 1));
    } else {
      out.append(it->second);
    }
    i = close + 1;
  }
  return out;
}

std::vector<llm::ChatMessage> PromptBuilder::retrieval(
    const corpus::Problem& p) const {
  return user_message(render(
      templates_.retrieval,
      {{"statement", p.statement},
       {"schema", xml::schema_outline(AgentRole::Retrieval)}}));
}

std::vector<llm::ChatMessage> PromptBuilder::planning(
    const corpus::Problem& p, const xml::RetrievalOutput& retrieved,
    int plan_count) const {
  return user_message(render(
      templates_.planning,
      {{"statement", p.statement},
       {"algorithm", retrieved.algorithm_name},
       {"tutorial", retrieved.tutorial},
       {"plan_count", std::to_string(plan_count)},
       {"schema", xml::schema_outline(AgentRole::Planning)}}));
}

std::vector<llm::ChatMessage> PromptBuilder::coding(
    const corpus::Problem& p, const xml::RetrievalOutput& retrieved,
    const xml::Plan& plan) const {
  return user_message(render(
      templates_.coding,
      {{"statement", p.statement},
       {"algorithm", retrieved.algorithm_name},
       {"plan", plan.steps},
       {"language", p.language},
       {"schema", xml::schema_outline(AgentRole::Coding)}}));
}

std::vector<llm::ChatMessage> PromptBuilder::debugging(
    const corpus::Problem& p, const xml::Plan& plan, const std::string& code,
    const FailingTest& failing) const {
  return user_message(render(
      templates_.debugging,
      {{"statement", p.statement},
       {"plan", plan.steps},
       {"code", code},
       {"language", p.language},
       {"failed_test", format_failing_test(failing)},
       {"schema", xml::schema_outline(AgentRole::Debugging)}}));
}

std::vector<llm::ChatMessage> PromptBuilder::supervisor(
    const corpus::Problem& p, const SupervisorContext& ctx) const {
  std::string failed;
  for (const FailingTest& test : ctx.failing_tests) {
    failed += format_failing_test(test);
    failed += "---\n";
  }
  return user_message(render(
      templates_.supervisor,
      {{"statement", p.statement},
       {"retrieval_xml", ctx.retrieval_xml},
       {"plan", ctx.plan},
       {"code", ctx.code},
       {"language", ctx.language.empty() ? p.language : ctx.language},
       {"failed_tests", failed},
       {"schema", xml::schema_outline(AgentRole::Supervisor)}}));
}

std::vector<llm::ChatMessage> PromptBuilder::with_feedback(
    std::vector<llm::ChatMessage> prompt, std::string_view feedback) {
  if (prompt.empty()) {
    return prompt;
  }
  std::string& content = prompt.back().content;
  content += "\nSupervisor feedback on the previous failed attempt:\n";
  content += feedback;
  content += "\n";
  return prompt;
}

}  // namespace mapforge::prompts
