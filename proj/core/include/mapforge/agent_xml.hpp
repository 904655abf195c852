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

#ifndef MAPFORGE_AGENT_XML_HPP_
#define MAPFORGE_AGENT_XML_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mapforge/roles.hpp"

namespace mapforge::xml {

enum class FailureKind {
  NotWellFormed,
  MissingTag,
  UnclosedTag,
  UnexpectedTag,
  BadConfidence,
  NoCodeBlock,
};

std::string_view to_string(FailureKind kind);
std::optional<FailureKind> failure_kind_from_string(std::string_view name);

// detail carries the offending tag name for the tag kinds and the offending
// fragment for NotWellFormed / BadConfidence / NoCodeBlock.
struct FormatFailure {
  AgentRole role = AgentRole::Retrieval;
  FailureKind kind = FailureKind::NotWellFormed;
  std::string detail;

  bool operator==(const FormatFailure&) const = default;
};

struct RetrievalOutput {
  std::string algorithm_name;
  std::string tutorial;

  bool operator==(const RetrievalOutput&) const = default;
};

struct Plan {
  std::string steps;
  int confidence = 0;

  bool operator==(const Plan&) const = default;
};

struct PlanSet {
  std::vector<Plan> plans;

  bool operator==(const PlanSet&) const = default;
};

struct BlameReport {
  AgentRole blamed_role = AgentRole::Retrieval;  // Retrieval|Planning|Coding
  std::string feedback;

  bool operator==(const BlameReport&) const = default;
};

template <typename T>
using ParseResult = std::variant<T, std::vector<FormatFailure>>;

template <typename T>
bool parsed_ok(const ParseResult<T>& r) {
  return std::holds_alternative<T>(r);
}

// Strict parsers. Success requires the exact role schema with no extra
// elements; on failure every detected violation is reported.
ParseResult<RetrievalOutput> parse_retrieval(std::string_view raw);
ParseResult<PlanSet> parse_plans(std::string_view raw);
ParseResult<BlameReport> parse_supervisor(std::string_view raw);

// Returns the last fenced code block whose info string matches `language`
// (case-insensitive), else the last fenced block of any language.
std::variant<std::string, FormatFailure> extract_code(
    std::string_view raw, std::string_view language,
    AgentRole role = AgentRole::Coding);

// Lenient recovery: closes unclosed known tags, drops unknown elements,
// trims text outside the root. Returns a value only when the recovered
// document re-serializes to something the strict parser accepts.
std::optional<RetrievalOutput> recover_retrieval(std::string_view raw);
std::optional<PlanSet> recover_plans(std::string_view raw);
std::optional<BlameReport> recover_supervisor(std::string_view raw);

std::string to_xml(const RetrievalOutput& value);
std::string to_xml(const PlanSet& value);
std::string to_xml(const BlameReport& value);

// Schema description for a role, suitable for embedding in prompts.
std::string schema_outline(AgentRole role);

// The full declarative schema table as pretty-printed JSON. The shipped
// schemas/agent_schemas.json file must match this exactly.
std::string schema_table_json();

void to_json(nlohmann::json& j, const FormatFailure& f);
void from_json(const nlohmann::json& j, FormatFailure& f);
void to_json(nlohmann::json& j, const RetrievalOutput& v);
void from_json(const nlohmann::json& j, RetrievalOutput& v);
void to_json(nlohmann::json& j, const Plan& p);
void from_json(const nlohmann::json& j, Plan& p);
void to_json(nlohmann::json& j, const PlanSet& p);
void from_json(const nlohmann::json& j, PlanSet& p);
void to_json(nlohmann::json& j, const BlameReport& b);
void from_json(const nlohmann::json& j, BlameReport& b);

}  // namespace mapforge::xml

#endif  // MAPFORGE_AGENT_XML_HPP_
