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

#ifndef MAPFORGE_PROMPTS_HPP_
#define MAPFORGE_PROMPTS_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mapforge/agent_xml.hpp"
#include "mapforge/llm_gateway.hpp"
#include "mapforge/roles.hpp"
#include "mapforge/sandbox.hpp"

namespace mapforge::corpus {
struct Problem;
struct TestCase;
}  // namespace mapforge::corpus

namespace mapforge::prompts {

// One failing test as shown to the debugger and supervisor.
struct FailingTest {
  std::string input;
  std::string expected;
  std::string actual;
  std::string stderr_text;
  std::string verdict;
};

FailingTest failing_test_from(const corpus::TestCase& test,
                              const sandbox::TestResult& result);

std::string format_failing_test(const FailingTest& test);

// Editable template texts, one per role. Placeholders use {name} syntax;
// unknown placeholders are left verbatim and substituted values are never
// re-scanned.
struct PromptTemplates {
  std::string retrieval;
  std::string planning;
  std::string coding;
  std::string debugging;
  std::string supervisor;

  static PromptTemplates defaults();

  // Reads <role>.txt files from a directory; roles without a file keep the
  // built-in default.
  static PromptTemplates load_dir(const std::filesystem::path& dir);

  // Writes the current templates out as editable files.
  void save_dir(const std::filesystem::path& dir) const;

  const std::string& for_role(AgentRole role) const;
};

std::string render(std::string_view tmpl,
                   const std::map<std::string, std::string>& values);

// Everything the supervisor sees about a failed trajectory.
struct SupervisorContext {
  std::string retrieval_xml;
  std::string plan;
  std::string code;
  std::string language;
  std::vector<FailingTest> failing_tests;
};

// Builds the runtime prompt for each role. Every prompt is a single user
// message; supervision-time feedback is appended by with_feedback and never
// baked into these builders, so stored training inputs are rebuilt clean.
class PromptBuilder {
 public:
  PromptBuilder() : templates_(PromptTemplates::defaults()) {}
  explicit PromptBuilder(PromptTemplates templates)
      : templates_(std::move(templates)) {}

  std::vector<llm::ChatMessage> retrieval(const corpus::Problem& p) const;
  std::vector<llm::ChatMessage> planning(const corpus::Problem& p,
                                         const xml::RetrievalOutput& retrieved,
                                         int plan_count) const;
  std::vector<llm::ChatMessage> coding(const corpus::Problem& p,
                                       const xml::RetrievalOutput& retrieved,
                                       const xml::Plan& plan) const;
  std::vector<llm::ChatMessage> debugging(const corpus::Problem& p,
                                          const xml::Plan& plan,
                                          const std::string& code,
                                          const FailingTest& failing) const;
  std::vector<llm::ChatMessage> supervisor(const corpus::Problem& p,
                                           const SupervisorContext& ctx) const;

  static std::vector<llm::ChatMessage> with_feedback(
      std::vector<llm::ChatMessage> prompt, std::string_view feedback);

  const PromptTemplates& templates() const { return templates_; }

 private:
  PromptTemplates templates_;
};

}  // namespace mapforge::prompts

#endif  // MAPFORGE_PROMPTS_HPP_
