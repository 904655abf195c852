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

#ifndef MAPFORGE_ORCHESTRATOR_HPP_
#define MAPFORGE_ORCHESTRATOR_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mapforge/agent_xml.hpp"
#include "mapforge/corpus.hpp"
#include "mapforge/llm_gateway.hpp"
#include "mapforge/prompts.hpp"
#include "mapforge/roles.hpp"
#include "mapforge/sandbox.hpp"

namespace mapforge::pipeline {

struct PipelineConfig {
  int plan_count = 3;     // k: plans requested and visited at most
  int debug_rounds = 5;   // t: max debug iterations per plan
  int format_retries = 2; // r: re-prompts after a malformed response
  sandbox::ExecutionLimits limits;  // per-problem limits override time/memory
};

// One agent invocation: the prompt of the attempt that produced
// raw_response, the parse outcome, and cost accumulated over every attempt.
struct StageRecord {
  AgentRole role = AgentRole::Retrieval;
  std::vector<llm::ChatMessage> prompt;
  std::string raw_response;
  bool parsed_ok = false;
  bool recovered = false;  // value obtained via lenient recovery
  bool replayed = false;   // upstream content reused during supervision
  std::vector<xml::FormatFailure> failures;
  llm::Usage usage;
  std::int64_t wall_time_ms = 0;
  int attempt = 0;  // attempts made (== backend calls for this stage)

  int plan_index = -1;  // ordered-plan position for coding/debugging
  int debug_round = 0;  // 1-based within a plan, 0 otherwise

  std::optional<xml::RetrievalOutput> retrieval;
  std::optional<xml::PlanSet> plans;
  std::optional<std::string> code;
  std::optional<xml::BlameReport> blame;
  std::optional<sandbox::Verdict> sample_verdict;  // this stage's code on samples

  bool has_value() const;
};

struct Trajectory {
  std::string problem_id;
  std::vector<StageRecord> stages;
  int plans_tried = 0;
  int debug_iterations_used = 0;
  std::optional<std::string> final_source;
  int final_stage_index = -1;  // stage that produced final_source
  std::optional<sandbox::Verdict> sample_verdict;
  std::optional<sandbox::Verdict> hidden_verdict;  // over sample + hidden
  bool solved_without_debug = false;
  std::optional<AgentRole> aborted_stage;
  llm::CostLedger ledger;  // equals the sum of stage usages
};

// Supervision-time controls: upstream stages replayed from a prior
// trajectory instead of re-invoked, and feedback appended to the
// regenerated role's prompt.
struct RunOverrides {
  std::optional<std::pair<xml::RetrievalOutput, std::string>> fixed_retrieval;
  std::optional<std::pair<xml::PlanSet, std::string>> fixed_plans;
  std::map<AgentRole, std::string> feedback;
};

// Descending confidence, stable on ties (generation order preserved).
std::vector<xml::Plan> order_plans(const xml::PlanSet& plans);

bool should_debug(sandbox::Verdict sample_verdict, int rounds_used,
                  int debug_rounds);

class Pipeline {
 public:
  Pipeline(llm::Gateway& gateway, prompts::PromptBuilder builder,
           PipelineConfig cfg,
           sandbox::ToolchainMap toolchains = sandbox::default_toolchains());

  // Runs retrieval -> planning -> (coding -> debug loop) with
  // confidence-ordered plan backtracking, then judges the last produced
  // code over sample + hidden tests. Format failures after retries and
  // recovery abort the problem (recorded, never thrown).
  Trajectory run_problem(const corpus::Problem& p,
                         const RunOverrides& overrides = {}) const;

  // Uniform wrapper: complete -> strict parse -> corrective retries ->
  // lenient recovery. Language selects the fenced-block info string for
  // code roles.
  StageRecord stage_call(AgentRole role, std::vector<llm::ChatMessage> prompt,
                         std::string_view language = "python") const;

  const PipelineConfig& config() const { return cfg_; }
  const prompts::PromptBuilder& builder() const { return builder_; }
  llm::Gateway& gateway() const { return gateway_; }
  const sandbox::ToolchainMap& toolchains() const { return toolchains_; }

 private:
  llm::Gateway& gateway_;
  prompts::PromptBuilder builder_;
  PipelineConfig cfg_;
  sandbox::ToolchainMap toolchains_;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);
void to_json(nlohmann::json& j, const StageRecord& r);
void from_json(const nlohmann::json& j, StageRecord& r);
void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);

}  // namespace mapforge::pipeline

#endif  // MAPFORGE_ORCHESTRATOR_HPP_
