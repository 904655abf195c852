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

#ifndef MAPFORGE_CURATOR_HPP_
#define MAPFORGE_CURATOR_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mapforge/corpus.hpp"
#include "mapforge/llm_gateway.hpp"
#include "mapforge/orchestrator.hpp"
#include "mapforge/roles.hpp"
#include "mapforge/sandbox.hpp"

namespace mapforge::curation {

enum class Provenance { Distilled, SupervisorCorrected };

std::string_view to_string(Provenance p);
std::optional<Provenance> provenance_from_string(std::string_view name);

// One fine-tuning record. The input is the runtime prompt for the role and
// never contains supervisor feedback; the source trajectory's final verdict
// is Accepted.
struct TrainingExample {
  AgentRole role = AgentRole::Retrieval;
  std::vector<llm::ChatMessage> input;
  std::string output;
  Provenance provenance = Provenance::Distilled;
  std::string problem_id;
  std::string source_model;

  bool operator==(const TrainingExample&) const = default;
};

// Audit record for one supervised problem. blamed_role is present exactly
// when a corrected example was emitted; feedback is kept for audit even on
// exhaustion and must never leak into example inputs.
struct CurationRecord {
  std::string problem_id;
  std::vector<TrainingExample> examples;
  std::optional<std::string> supervisor_feedback;
  std::optional<AgentRole> blamed_role;
  int iterations = 0;
};

// True iff the trajectory's final program passed every test, sample and
// hidden alike. Aborted trajectories never pass.
bool pass_filter(const pipeline::Trajectory& traj);

// One Retrieval example per trajectory that passes pass_filter. Stages that
// needed lenient recovery are skipped: their raw output is malformed and
// would teach the schema violation.
std::vector<TrainingExample> distill_retrieval(
    const std::vector<pipeline::Trajectory>& strong_trajs,
    std::string_view source_model);

// distill_retrieval generalized over roles. For Coding the distilled stage
// is the one for the plan that ended the run (earlier plans failed).
// Debugging requests route through distill_debugging's gate.
std::vector<TrainingExample> distill_role(
    const std::vector<pipeline::Trajectory>& trajs, AgentRole role,
    std::string_view source_model);

// One Debugging example per trajectory whose pre-debug code failed the
// samples and whose final patched program passed everything. The example is
// the final patch round: prompt with code and failing test in, patch out.
std::vector<TrainingExample> distill_debugging(
    const std::vector<pipeline::Trajectory>& mixed_trajs,
    std::string_view source_model);

// Ids where the strong model succeeded and the small model failed, in map
// order. Throws DomainMismatch when the key sets differ.
std::vector<std::string> select_supervision_candidates(
    const std::map<std::string, sandbox::Verdict>& strong_results,
    const std::map<std::string, sandbox::Verdict>& small_results);

struct CurationConfig {
  int max_supervision_rounds = 3;
};

// Supervisor-guided correction driver. Owns no backends; calls go through
// the pipeline's gateway so the cassette and ledger see them.
class Curator {
 public:
  explicit Curator(const pipeline::Pipeline& pipe, CurationConfig cfg = {});

  // One blame/regenerate/re-judge loop per round, up to the configured
  // bound. Only the blamed stage gets the feedback; stages before it are
  // replayed from `traj`, stages after it re-run with the configured
  // backends. On an Accepted re-judge the blamed role's example is stored
  // with a clean prompt (rebuilt without the feedback). Unparseable blame
  // or exhaustion ends the loop with zero examples, record kept for audit.
  CurationRecord supervise(const pipeline::Trajectory& traj,
                           const corpus::Problem& p) const;

  const CurationConfig& config() const { return cfg_; }

 private:
  const pipeline::Pipeline& pipe_;
  CurationConfig cfg_;
};

void to_json(nlohmann::json& j, const TrainingExample& e);
void from_json(const nlohmann::json& j, TrainingExample& e);
void to_json(nlohmann::json& j, const CurationRecord& r);
void from_json(const nlohmann::json& j, CurationRecord& r);

}  // namespace mapforge::curation

#endif  // MAPFORGE_CURATOR_HPP_
