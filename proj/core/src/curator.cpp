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

#include "mapforge/curator.hpp"

#include <algorithm>
#include <utility>

#include <nlohmann/json.hpp>

#include "mapforge/agent_xml.hpp"
#include "mapforge/errors.hpp"
#include "mapforge/prompts.hpp"

namespace mapforge::curation {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxFailingTestsShown = 3;

bool clean_stage(const pipeline::StageRecord& s) {
  return s.parsed_ok && !s.recovered;
}

const pipeline::StageRecord* last_stage_of(const pipeline::Trajectory& traj,
                                           AgentRole role) {
  const pipeline::StageRecord* found = nullptr;
  for (const pipeline::StageRecord& s : traj.stages) {
    if (s.role == role) {
      found = &s;
    }
  }
  return found;
}

// The plan the final code path used, resolved through confidence ordering.
std::optional<xml::Plan> final_plan(const pipeline::Trajectory& traj) {
  const pipeline::StageRecord* planning =
      last_stage_of(traj, AgentRole::Planning);
  const pipeline::StageRecord* coding = last_stage_of(traj, AgentRole::Coding);
  if (!planning || !planning->plans || !coding || coding->plan_index < 0) {
    return std::nullopt;
  }
  std::vector<xml::Plan> ordered = pipeline::order_plans(*planning->plans);
  const auto idx = static_cast<std::size_t>(coding->plan_index);
  if (idx >= ordered.size()) {
    return std::nullopt;
  }
  return ordered[idx];
}

// Raw text that re-parses cleanly: the original response unless recovery
// rewrote it, in which case the canonical serialization stands in.
template <typename Value>
std::string replayable_raw(const pipeline::StageRecord& s, const Value& value) {
  return s.recovered ? xml::to_xml(value) : s.raw_response;
}

TrainingExample distilled_example(const pipeline::StageRecord& stage,
                                  const pipeline::Trajectory& traj,
                                  std::string_view source_model) {
  TrainingExample ex;
  ex.role = stage.role;
  ex.input = stage.prompt;
  ex.output = stage.raw_response;
  ex.provenance = Provenance::Distilled;
  ex.problem_id = traj.problem_id;
  ex.source_model = std::string(source_model);
  return ex;
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Distilled:
      return "distilled";
    case Provenance::SupervisorCorrected:
      return "supervisor_corrected";
  }
  return "distilled";
}

std::optional<Provenance> provenance_from_string(std::string_view name) {
  if (name == "distilled") {
    return Provenance::Distilled;
  }
  if (name == "supervisor_corrected") {
    return Provenance::SupervisorCorrected;
  }
  return std::nullopt;
}

bool pass_filter(const pipeline::Trajectory& traj) {
  return traj.hidden_verdict &&
         *traj.hidden_verdict == sandbox::Verdict::Accepted;
}

std::vector<TrainingExample> distill_retrieval(
    const std::vector<pipeline::Trajectory>& strong_trajs,
    std::string_view source_model) {
  return distill_role(strong_trajs, AgentRole::Retrieval, source_model);
}

std::vector<TrainingExample> distill_role(
    const std::vector<pipeline::Trajectory>& trajs, AgentRole role,
    std::string_view source_model) {
  if (role == AgentRole::Debugging) {
    return distill_debugging(trajs, source_model);
  }
  std::vector<TrainingExample> out;
  for (const pipeline::Trajectory& traj : trajs) {
    if (!pass_filter(traj)) {
      continue;
    }
    const pipeline::StageRecord* stage = last_stage_of(traj, role);
    if (!stage || !clean_stage(*stage) || !stage->has_value()) {
      continue;
    }
    out.push_back(distilled_example(*stage, traj, source_model));
  }
  return out;
}

std::vector<TrainingExample> distill_debugging(
    const std::vector<pipeline::Trajectory>& mixed_trajs,
    std::string_view source_model) {
  std::vector<TrainingExample> out;
  for (const pipeline::Trajectory& traj : mixed_trajs) {
    if (!pass_filter(traj) || traj.final_stage_index < 0 ||
        static_cast<std::size_t>(traj.final_stage_index) >=
            traj.stages.size()) {
      continue;
    }
    const pipeline::StageRecord& final_stage =
        traj.stages[static_cast<std::size_t>(traj.final_stage_index)];
    if (final_stage.role != AgentRole::Debugging ||
        !clean_stage(final_stage) || !final_stage.code) {
      continue;
    }
    // The debug loop only runs after a failing sample verdict, so the
    // pre-debug gate is implied; keep the explicit check anyway.
    const pipeline::StageRecord* pre_debug = nullptr;
    for (const pipeline::StageRecord& s : traj.stages) {
      if (s.role == AgentRole::Coding && s.plan_index == final_stage.plan_index) {
        pre_debug = &s;
      }
    }
    if (pre_debug && pre_debug->sample_verdict &&
        *pre_debug->sample_verdict == sandbox::Verdict::Accepted) {
      continue;
    }
    out.push_back(distilled_example(final_stage, traj, source_model));
  }
  return out;
}

std::vector<std::string> select_supervision_candidates(
    const std::map<std::string, sandbox::Verdict>& strong_results,
    const std::map<std::string, sandbox::Verdict>& small_results) {
  if (strong_results.size() != small_results.size()) {
    throw DomainMismatchError("result maps cover different problem sets");
  }
  for (const auto& [id, verdict] : strong_results) {
    (void)verdict;
    if (!small_results.contains(id)) {
      throw DomainMismatchError("problem '" + id +
                                "' missing from the small-model results");
    }
  }
  std::vector<std::string> out;
  for (const auto& [id, strong] : strong_results) {
    if (strong == sandbox::Verdict::Accepted &&
        small_results.at(id) != sandbox::Verdict::Accepted) {
      out.push_back(id);
    }
  }
  return out;
}

Curator::Curator(const pipeline::Pipeline& pipe, CurationConfig cfg)
    : pipe_(pipe), cfg_(cfg) {}

namespace {

prompts::SupervisorContext make_context(const pipeline::Pipeline& pipe,
                                        const pipeline::Trajectory& traj,
                                        const corpus::Problem& p) {
  prompts::SupervisorContext ctx;
  ctx.language = p.language;

  const pipeline::StageRecord* retrieval =
      last_stage_of(traj, AgentRole::Retrieval);
  if (retrieval && retrieval->retrieval) {
    ctx.retrieval_xml = replayable_raw(*retrieval, *retrieval->retrieval);
  }
  if (std::optional<xml::Plan> plan = final_plan(traj)) {
    ctx.plan = plan->steps;
  }
  ctx.code = traj.final_source.value_or("");

  if (traj.final_source) {
    sandbox::ExecutionLimits limits = pipe.config().limits;
    limits.time_limit_s = p.time_limit_s;
    limits.memory_limit_mb = p.memory_limit_mb;
    const sandbox::ExecutionReport report = sandbox::judge_problem(
        *traj.final_source, p, limits, pipe.toolchains());
    if (report.overall == sandbox::Verdict::CompileError) {
      prompts::FailingTest ft;
      ft.verdict = std::string(to_string(sandbox::Verdict::CompileError));
      ft.stderr_text = report.compile_log;
      ctx.failing_tests.push_back(std::move(ft));
    } else {
      std::vector<corpus::TestCase> all = p.sample_tests;
      all.insert(all.end(), p.hidden_tests.begin(), p.hidden_tests.end());
      for (std::size_t i = 0;
           i < report.per_test.size() && i < all.size() &&
           ctx.failing_tests.size() < kMaxFailingTestsShown;
           ++i) {
        if (report.per_test[i].verdict != sandbox::Verdict::Accepted) {
          ctx.failing_tests.push_back(
              prompts::failing_test_from(all[i], report.per_test[i]));
        }
      }
    }
  }
  return ctx;
}

pipeline::RunOverrides make_overrides(const pipeline::Trajectory& traj,
                                      AgentRole blamed,
                                      const std::string& feedback) {
  pipeline::RunOverrides ov;
  ov.feedback[blamed] = feedback;
  const bool fix_retrieval =
      blamed == AgentRole::Planning || blamed == AgentRole::Coding;
  const bool fix_plans = blamed == AgentRole::Coding;
  if (fix_retrieval) {
    const pipeline::StageRecord* s = last_stage_of(traj, AgentRole::Retrieval);
    if (s && s->retrieval) {
      ov.fixed_retrieval = {*s->retrieval, replayable_raw(*s, *s->retrieval)};
    }
  }
  if (fix_plans) {
    const pipeline::StageRecord* s = last_stage_of(traj, AgentRole::Planning);
    if (s && s->plans) {
      ov.fixed_plans = {*s->plans, replayable_raw(*s, *s->plans)};
    }
  }
  return ov;
}

// The runtime prompt for the blamed stage with no feedback in it: rebuilt
// from the retry trajectory's own upstream artifacts.
std::vector<llm::ChatMessage> clean_input(const pipeline::Pipeline& pipe,
                                          const corpus::Problem& p,
                                          AgentRole blamed,
                                          const pipeline::Trajectory& retry) {
  const prompts::PromptBuilder& builder = pipe.builder();
  if (blamed == AgentRole::Retrieval) {
    return builder.retrieval(p);
  }
  const pipeline::StageRecord* retrieval =
      last_stage_of(retry, AgentRole::Retrieval);
  if (!retrieval || !retrieval->retrieval) {
    return {};
  }
  if (blamed == AgentRole::Planning) {
    return builder.planning(p, *retrieval->retrieval,
                            pipe.config().plan_count);
  }
  if (std::optional<xml::Plan> plan = final_plan(retry)) {
    return builder.coding(p, *retrieval->retrieval, *plan);
  }
  return {};
}

}  // namespace

CurationRecord Curator::supervise(const pipeline::Trajectory& traj,
                                  const corpus::Problem& p) const {
  CurationRecord rec;
  rec.problem_id = traj.problem_id;

  pipeline::Trajectory current = traj;
  for (int round = 1; round <= cfg_.max_supervision_rounds; ++round) {
    rec.iterations = round;

    const prompts::SupervisorContext ctx = make_context(pipe_, current, p);
    const pipeline::StageRecord sup = pipe_.stage_call(
        AgentRole::Supervisor, pipe_.builder().supervisor(p, ctx), p.language);
    if (!sup.blame) {
      return rec;
    }
    const AgentRole blamed = sup.blame->blamed_role;
    rec.supervisor_feedback = sup.blame->feedback;

    const pipeline::Trajectory retry = pipe_.run_problem(
        p, make_overrides(current, blamed, sup.blame->feedback));
    if (pass_filter(retry)) {
      // A recovered stage would store a malformed response, so it yields
      // an audit record without an example, same as distillation.
      const pipeline::StageRecord* regenerated = last_stage_of(retry, blamed);
      if (!regenerated || !clean_stage(*regenerated) ||
          !regenerated->has_value()) {
        return rec;
      }
      TrainingExample ex;
      ex.role = blamed;
      ex.input = clean_input(pipe_, p, blamed, retry);
      ex.output = regenerated->raw_response;
      ex.provenance = Provenance::SupervisorCorrected;
      ex.problem_id = traj.problem_id;
      ex.source_model = pipe_.gateway().role_endpoint(blamed).model;
      rec.examples.push_back(std::move(ex));
      rec.blamed_role = blamed;
      return rec;
    }
    current = retry;
  }
  return rec;
}

void to_json(json& j, const TrainingExample& e) {
  j = json{{"role", to_string(e.role)},
           {"input", e.input},
           {"output", e.output},
           {"provenance", to_string(e.provenance)},
           {"problem_id", e.problem_id},
           {"source_model", e.source_model}};
}

void from_json(const json& j, TrainingExample& e) {
  const auto role = role_from_string(j.at("role").get<std::string>());
  if (!role) {
    throw Error("unknown agent role: " + j.at("role").get<std::string>());
  }
  e.role = *role;
  e.input = j.at("input").get<std::vector<llm::ChatMessage>>();
  e.output = j.at("output").get<std::string>();
  const auto prov =
      provenance_from_string(j.at("provenance").get<std::string>());
  if (!prov) {
    throw Error("unknown provenance: " +
                j.at("provenance").get<std::string>());
  }
  e.provenance = *prov;
  e.problem_id = j.at("problem_id").get<std::string>();
  e.source_model = j.at("source_model").get<std::string>();
}

void to_json(json& j, const CurationRecord& r) {
  j = json{{"problem_id", r.problem_id},
           {"examples", r.examples},
           {"iterations", r.iterations}};
  if (r.supervisor_feedback) {
    j["supervisor_feedback"] = *r.supervisor_feedback;
  }
  if (r.blamed_role) {
    j["blamed_role"] = to_string(*r.blamed_role);
  }
}

void from_json(const json& j, CurationRecord& r) {
  r.problem_id = j.at("problem_id").get<std::string>();
  r.examples = j.at("examples").get<std::vector<TrainingExample>>();
  r.iterations = j.at("iterations").get<int>();
  r.supervisor_feedback.reset();
  if (j.contains("supervisor_feedback")) {
    r.supervisor_feedback = j.at("supervisor_feedback").get<std::string>();
  }
  r.blamed_role.reset();
  if (j.contains("blamed_role")) {
    r.blamed_role = role_from_string(j.at("blamed_role").get<std::string>());
  }
}

}  // namespace mapforge::curation
