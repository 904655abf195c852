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

#include "mapforge/orchestrator.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "mapforge/errors.hpp"

namespace mapforge::pipeline {

using nlohmann::json;

bool StageRecord::has_value() const {
  return retrieval.has_value() || plans.has_value() || code.has_value() ||
         blame.has_value();
}

std::vector<xml::Plan> order_plans(const xml::PlanSet& plans) {
  std::vector<xml::Plan> out = plans.plans;
  std::stable_sort(out.begin(), out.end(),
                   [](const xml::Plan& a, const xml::Plan& b) {
                     return a.confidence > b.confidence;
                   });
  return out;
}

bool should_debug(sandbox::Verdict sample_verdict, int rounds_used,
                  int debug_rounds) {
  return sample_verdict != sandbox::Verdict::Accepted &&
         rounds_used < debug_rounds;
}

Pipeline::Pipeline(llm::Gateway& gateway, prompts::PromptBuilder builder,
                   PipelineConfig cfg, sandbox::ToolchainMap toolchains)
    : gateway_(gateway),
      builder_(std::move(builder)),
      cfg_(cfg),
      toolchains_(std::move(toolchains)) {}

namespace {

std::string schema_name(AgentRole role) {
  switch (role) {
    case AgentRole::Retrieval:
      return "retrieval XML";
    case AgentRole::Planning:
      return "planning XML";
    case AgentRole::Coding:
    case AgentRole::Debugging:
      return "fenced code block";
    case AgentRole::Supervisor:
      return "verdict XML";
  }
  return "response";
}

std::string corrective_text(AgentRole role,
                            const std::vector<xml::FormatFailure>& failures) {
  std::string text = "Your previous response violated the required " +
                     schema_name(role) + " format";
  if (!failures.empty()) {
    text += " (" + std::string(xml::to_string(failures.front().kind));
    if (!failures.front().detail.empty()) {
      text += ": " + failures.front().detail;
    }
    text += ")";
  }
  text += ". Respond again following exactly this structure:\n" +
          xml::schema_outline(role);
  return text;
}

// Applies one strict parse to the record; returns the failures it added.
std::size_t apply_parse(AgentRole role, std::string_view raw,
                        std::string_view language, StageRecord& rec) {
  const std::size_t before = rec.failures.size();
  switch (role) {
    case AgentRole::Retrieval: {
      auto result = xml::parse_retrieval(raw);
      if (xml::parsed_ok(result)) {
        rec.retrieval = std::get<xml::RetrievalOutput>(std::move(result));
      } else {
        auto& fails = std::get<std::vector<xml::FormatFailure>>(result);
        rec.failures.insert(rec.failures.end(), fails.begin(), fails.end());
      }
      break;
    }
    case AgentRole::Planning: {
      auto result = xml::parse_plans(raw);
      if (xml::parsed_ok(result)) {
        rec.plans = std::get<xml::PlanSet>(std::move(result));
      } else {
        auto& fails = std::get<std::vector<xml::FormatFailure>>(result);
        rec.failures.insert(rec.failures.end(), fails.begin(), fails.end());
      }
      break;
    }
    case AgentRole::Coding:
    case AgentRole::Debugging: {
      auto result = xml::extract_code(raw, language, role);
      if (std::holds_alternative<std::string>(result)) {
        rec.code = std::get<std::string>(std::move(result));
      } else {
        rec.failures.push_back(std::get<xml::FormatFailure>(std::move(result)));
      }
      break;
    }
    case AgentRole::Supervisor: {
      auto result = xml::parse_supervisor(raw);
      if (xml::parsed_ok(result)) {
        rec.blame = std::get<xml::BlameReport>(std::move(result));
      } else {
        auto& fails = std::get<std::vector<xml::FormatFailure>>(result);
        rec.failures.insert(rec.failures.end(), fails.begin(), fails.end());
      }
      break;
    }
  }
  return rec.failures.size() - before;
}

bool apply_recovery(AgentRole role, std::string_view raw, StageRecord& rec) {
  switch (role) {
    case AgentRole::Retrieval:
      if (auto value = xml::recover_retrieval(raw)) {
        rec.retrieval = std::move(*value);
        return true;
      }
      return false;
    case AgentRole::Planning:
      if (auto value = xml::recover_plans(raw)) {
        rec.plans = std::move(*value);
        return true;
      }
      return false;
    case AgentRole::Supervisor:
      if (auto value = xml::recover_supervisor(raw)) {
        rec.blame = std::move(*value);
        return true;
      }
      return false;
    case AgentRole::Coding:
    case AgentRole::Debugging:
      // extract_code is already lenient; nothing further to try.
      return false;
  }
  return false;
}

}  // namespace

StageRecord Pipeline::stage_call(AgentRole role,
                                 std::vector<llm::ChatMessage> prompt,
                                 std::string_view language) const {
  StageRecord rec;
  rec.role = role;
  std::vector<llm::ChatMessage> messages = std::move(prompt);

  const int max_attempts = cfg_.format_retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    llm::ChatResponse resp = gateway_.complete(role, messages);
    rec.attempt = attempt;
    rec.usage.prompt_tokens += resp.usage.prompt_tokens;
    rec.usage.completion_tokens += resp.usage.completion_tokens;
    rec.wall_time_ms += resp.latency_ms;
    rec.raw_response = resp.content;
    rec.prompt = messages;

    const std::size_t added = apply_parse(role, resp.content, language, rec);
    if (added == 0 && rec.has_value()) {
      rec.parsed_ok = true;
      return rec;
    }
    if (attempt < max_attempts) {
      messages.push_back(
          llm::ChatMessage{llm::MessageRole::Assistant, resp.content});
      messages.push_back(llm::ChatMessage{
          llm::MessageRole::User,
          corrective_text(role, {rec.failures.end() - added,
                                 rec.failures.end()})});
    }
  }

  if (apply_recovery(role, rec.raw_response, rec)) {
    rec.recovered = true;
  }
  return rec;
}

namespace {

void absorb_stage(Trajectory& traj, const StageRecord& rec) {
  traj.ledger.input_tokens += rec.usage.prompt_tokens;
  traj.ledger.output_tokens += rec.usage.completion_tokens;
  traj.ledger.calls += rec.attempt;
  traj.ledger.wall_time_ms += rec.wall_time_ms;
  traj.stages.push_back(rec);
}

StageRecord replayed_record(AgentRole role,
                            std::vector<llm::ChatMessage> prompt,
                            std::string raw) {
  StageRecord rec;
  rec.role = role;
  rec.prompt = std::move(prompt);
  rec.raw_response = std::move(raw);
  rec.parsed_ok = true;
  rec.replayed = true;
  rec.attempt = 0;
  return rec;
}

}  // namespace

Trajectory Pipeline::run_problem(const corpus::Problem& p,
                                 const RunOverrides& overrides) const {
  Trajectory traj;
  traj.problem_id = p.id;

  sandbox::ExecutionLimits limits = cfg_.limits;
  limits.time_limit_s = p.time_limit_s;
  limits.memory_limit_mb = p.memory_limit_mb;

  const auto feedback_for = [&](AgentRole role,
                                std::vector<llm::ChatMessage> prompt) {
    const auto it = overrides.feedback.find(role);
    if (it == overrides.feedback.end()) {
      return prompt;
    }
    return prompts::PromptBuilder::with_feedback(std::move(prompt),
                                                 it->second);
  };

  // Stage 1: retrieval.
  xml::RetrievalOutput retrieved;
  if (overrides.fixed_retrieval) {
    StageRecord rec = replayed_record(AgentRole::Retrieval,
                                      builder_.retrieval(p),
                                      overrides.fixed_retrieval->second);
    rec.retrieval = overrides.fixed_retrieval->first;
    absorb_stage(traj, rec);
    retrieved = overrides.fixed_retrieval->first;
  } else {
    StageRecord rec =
        stage_call(AgentRole::Retrieval,
                   feedback_for(AgentRole::Retrieval, builder_.retrieval(p)),
                   p.language);
    const bool ok = rec.retrieval.has_value();
    absorb_stage(traj, rec);
    if (!ok) {
      traj.aborted_stage = AgentRole::Retrieval;
      return traj;
    }
    retrieved = *traj.stages.back().retrieval;
  }

  // Stage 2: planning.
  xml::PlanSet plan_set;
  if (overrides.fixed_plans) {
    StageRecord rec = replayed_record(
        AgentRole::Planning,
        builder_.planning(p, retrieved, cfg_.plan_count),
        overrides.fixed_plans->second);
    rec.plans = overrides.fixed_plans->first;
    absorb_stage(traj, rec);
    plan_set = overrides.fixed_plans->first;
  } else {
    StageRecord rec = stage_call(
        AgentRole::Planning,
        feedback_for(AgentRole::Planning,
                     builder_.planning(p, retrieved, cfg_.plan_count)),
        p.language);
    const bool ok = rec.plans.has_value();
    absorb_stage(traj, rec);
    if (!ok) {
      traj.aborted_stage = AgentRole::Planning;
      return traj;
    }
    plan_set = *traj.stages.back().plans;
  }

  std::vector<xml::Plan> ordered = order_plans(plan_set);
  if (ordered.size() > static_cast<std::size_t>(cfg_.plan_count)) {
    ordered.resize(static_cast<std::size_t>(cfg_.plan_count));
  }

  // Stages 3 and 4: coding with per-plan debug loop, gated on sample tests.
  std::string current_code;
  bool have_code = false;
  bool sample_accepted = false;

  for (std::size_t plan_idx = 0;
       plan_idx < ordered.size() && !sample_accepted; ++plan_idx) {
    const xml::Plan& plan = ordered[plan_idx];
    traj.plans_tried = static_cast<int>(plan_idx) + 1;

    StageRecord coding = stage_call(
        AgentRole::Coding,
        feedback_for(AgentRole::Coding, builder_.coding(p, retrieved, plan)),
        p.language);
    coding.plan_index = static_cast<int>(plan_idx);
    const bool coded = coding.code.has_value();
    if (!coded) {
      absorb_stage(traj, coding);
      traj.aborted_stage = AgentRole::Coding;
      break;
    }

    current_code = *coding.code;
    have_code = true;

    sandbox::ExecutionReport sample_report;
    sandbox::Verdict verdict = sandbox::Verdict::Accepted;
    if (!p.sample_tests.empty()) {
      sample_report = sandbox::run_tests(current_code, p.language,
                                         p.sample_tests, limits, toolchains_);
      verdict = sample_report.overall;
    }
    coding.sample_verdict = verdict;
    absorb_stage(traj, coding);
    traj.final_stage_index = static_cast<int>(traj.stages.size()) - 1;
    traj.final_source = current_code;

    if (verdict == sandbox::Verdict::Accepted) {
      sample_accepted = true;
      break;
    }

    int rounds_used = 0;
    while (should_debug(verdict, rounds_used, cfg_.debug_rounds)) {
      prompts::FailingTest failing;
      if (sample_report.compiled && !sample_report.per_test.empty()) {
        for (std::size_t i = 0; i < sample_report.per_test.size(); ++i) {
          if (sample_report.per_test[i].verdict !=
              sandbox::Verdict::Accepted) {
            failing = prompts::failing_test_from(p.sample_tests[i],
                                                 sample_report.per_test[i]);
            break;
          }
        }
      } else {
        failing.verdict = std::string(
            sandbox::to_string(sandbox::Verdict::CompileError));
        failing.stderr_text = sample_report.compile_log.empty()
                                  ? "program failed to compile"
                                  : sample_report.compile_log;
      }

      StageRecord debug = stage_call(
          AgentRole::Debugging,
          feedback_for(AgentRole::Debugging,
                       builder_.debugging(p, plan, current_code, failing)),
          p.language);
      debug.plan_index = static_cast<int>(plan_idx);
      debug.debug_round = rounds_used + 1;
      ++traj.debug_iterations_used;
      ++rounds_used;

      const bool patched = debug.code.has_value();
      if (!patched) {
        absorb_stage(traj, debug);
        traj.aborted_stage = AgentRole::Debugging;
        break;
      }

      current_code = *debug.code;
      if (!p.sample_tests.empty()) {
        sample_report = sandbox::run_tests(current_code, p.language,
                                           p.sample_tests, limits,
                                           toolchains_);
        verdict = sample_report.overall;
      } else {
        verdict = sandbox::Verdict::Accepted;
      }
      debug.sample_verdict = verdict;
      absorb_stage(traj, debug);
      traj.final_stage_index = static_cast<int>(traj.stages.size()) - 1;
      traj.final_source = current_code;

      if (verdict == sandbox::Verdict::Accepted) {
        sample_accepted = true;
        break;
      }
    }
    if (traj.aborted_stage) {
      break;
    }
  }

  // Final judging: sample + hidden union of the last produced code.
  if (have_code) {
    const sandbox::ExecutionReport full =
        sandbox::judge_problem(current_code, p, limits, toolchains_);
    if (!p.sample_tests.empty()) {
      traj.sample_verdict =
          sandbox::aggregate(full, sandbox::JudgeScope::SampleOnly);
    }
    traj.hidden_verdict = sandbox::aggregate(full, sandbox::JudgeScope::All);
    traj.solved_without_debug =
        traj.hidden_verdict == sandbox::Verdict::Accepted &&
        traj.debug_iterations_used == 0;
  }
  return traj;
}

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  if (value) {
    j[key] = *value;
  }
}

}  // namespace

void to_json(json& j, const PipelineConfig& c) {
  j = json{{"plan_count", c.plan_count},
           {"debug_rounds", c.debug_rounds},
           {"format_retries", c.format_retries},
           {"limits", c.limits}};
}

void from_json(const json& j, PipelineConfig& c) {
  c.plan_count = j.value("plan_count", 3);
  c.debug_rounds = j.value("debug_rounds", 5);
  c.format_retries = j.value("format_retries", 2);
  c.limits = j.value("limits", sandbox::ExecutionLimits{});
}

void to_json(json& j, const StageRecord& r) {
  j = json{{"role", std::string(to_string(r.role))},
           {"prompt", r.prompt},
           {"raw_response", r.raw_response},
           {"parsed_ok", r.parsed_ok},
           {"recovered", r.recovered},
           {"replayed", r.replayed},
           {"failures", r.failures},
           {"usage", r.usage},
           {"wall_time_ms", r.wall_time_ms},
           {"attempt", r.attempt},
           {"plan_index", r.plan_index},
           {"debug_round", r.debug_round}};
  put_optional(j, "retrieval", r.retrieval);
  put_optional(j, "plans", r.plans);
  put_optional(j, "code", r.code);
  put_optional(j, "blame", r.blame);
  if (r.sample_verdict) {
    j["sample_verdict"] = std::string(sandbox::to_string(*r.sample_verdict));
  }
}

void from_json(const json& j, StageRecord& r) {
  const auto role = role_from_string(j.at("role").get<std::string>());
  if (!role) {
    throw Error("bad stage role");
  }
  r.role = *role;
  r.prompt = j.at("prompt").get<std::vector<llm::ChatMessage>>();
  r.raw_response = j.at("raw_response").get<std::string>();
  r.parsed_ok = j.value("parsed_ok", false);
  r.recovered = j.value("recovered", false);
  r.replayed = j.value("replayed", false);
  r.failures = j.value("failures", std::vector<xml::FormatFailure>{});
  r.usage = j.value("usage", llm::Usage{});
  r.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
  r.attempt = j.value("attempt", 0);
  r.plan_index = j.value("plan_index", -1);
  r.debug_round = j.value("debug_round", 0);
  if (j.contains("retrieval")) {
    r.retrieval = j.at("retrieval").get<xml::RetrievalOutput>();
  }
  if (j.contains("plans")) {
    r.plans = j.at("plans").get<xml::PlanSet>();
  }
  if (j.contains("code")) {
    r.code = j.at("code").get<std::string>();
  }
  if (j.contains("blame")) {
    r.blame = j.at("blame").get<xml::BlameReport>();
  }
  if (j.contains("sample_verdict")) {
    r.sample_verdict = sandbox::verdict_from_string(
        j.at("sample_verdict").get<std::string>());
  }
}

void to_json(json& j, const Trajectory& t) {
  j = json{{"problem_id", t.problem_id},
           {"plans_tried", t.plans_tried},
           {"debug_iterations_used", t.debug_iterations_used},
           {"final_stage_index", t.final_stage_index},
           {"solved_without_debug", t.solved_without_debug},
           {"ledger", t.ledger}};
  put_optional(j, "final_source", t.final_source);
  if (t.sample_verdict) {
    j["sample_verdict"] = std::string(sandbox::to_string(*t.sample_verdict));
  }
  if (t.hidden_verdict) {
    j["hidden_verdict"] = std::string(sandbox::to_string(*t.hidden_verdict));
  }
  if (t.aborted_stage) {
    j["aborted_stage"] = std::string(to_string(*t.aborted_stage));
  }
}

void from_json(const json& j, Trajectory& t) {
  t.problem_id = j.at("problem_id").get<std::string>();
  t.plans_tried = j.value("plans_tried", 0);
  t.debug_iterations_used = j.value("debug_iterations_used", 0);
  t.final_stage_index = j.value("final_stage_index", -1);
  t.solved_without_debug = j.value("solved_without_debug", false);
  t.ledger = j.value("ledger", llm::CostLedger{});
  if (j.contains("final_source")) {
    t.final_source = j.at("final_source").get<std::string>();
  }
  if (j.contains("sample_verdict")) {
    t.sample_verdict = sandbox::verdict_from_string(
        j.at("sample_verdict").get<std::string>());
  }
  if (j.contains("hidden_verdict")) {
    t.hidden_verdict = sandbox::verdict_from_string(
        j.at("hidden_verdict").get<std::string>());
  }
  if (j.contains("aborted_stage")) {
    t.aborted_stage =
        role_from_string(j.at("aborted_stage").get<std::string>());
  }
}

}  // namespace mapforge::pipeline
