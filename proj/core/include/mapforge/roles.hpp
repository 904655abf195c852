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

#ifndef MAPFORGE_ROLES_HPP_
#define MAPFORGE_ROLES_HPP_

#include <optional>
#include <string_view>

namespace mapforge {

// The four pipeline agents plus the curation-time supervisor. The supervisor
// never appears in pipeline trajectories.
enum class AgentRole {
  Retrieval,
  Planning,
  Coding,
  Debugging,
  Supervisor,
};

inline constexpr AgentRole kPipelineRoles[] = {
    AgentRole::Retrieval,
    AgentRole::Planning,
    AgentRole::Coding,
    AgentRole::Debugging,
};

std::string_view to_string(AgentRole role);
std::optional<AgentRole> role_from_string(std::string_view name);

}  // namespace mapforge

#endif  // MAPFORGE_ROLES_HPP_
