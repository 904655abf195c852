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

#include "mapforge/roles.hpp"

namespace mapforge {

std::string_view to_string(AgentRole role) {
  switch (role) {
    case AgentRole::Retrieval:
      return "retrieval";
    case AgentRole::Planning:
      return "planning";
    case AgentRole::Coding:
      return "coding";
    case AgentRole::Debugging:
      return "debugging";
    case AgentRole::Supervisor:
      return "supervisor";
  }
  return "unknown";
}

std::optional<AgentRole> role_from_string(std::string_view name) {
  if (name == "retrieval") return AgentRole::Retrieval;
  if (name == "planning") return AgentRole::Planning;
  if (name == "coding") return AgentRole::Coding;
  if (name == "debugging") return AgentRole::Debugging;
  if (name == "supervisor") return AgentRole::Supervisor;
  return std::nullopt;
}

}  // namespace mapforge
