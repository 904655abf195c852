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

#ifndef MAPFORGE_CONFIG_HPP_
#define MAPFORGE_CONFIG_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mapforge/curator.hpp"
#include "mapforge/llm_gateway.hpp"
#include "mapforge/orchestrator.hpp"
#include "mapforge/roles.hpp"
#include "mapforge/sandbox.hpp"

namespace mapforge::config {

// One chat endpoint. The API key is read from the named environment
// variable at wiring time; the config file never holds secrets.
struct BackendConfig {
  std::string base_url;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 2048;
  std::string api_key_env;
};

struct Paths {
  std::string runs = "runs";
  std::string cassettes = "cassettes";
  std::string corpora = "corpora";
};

// The whole config file. Grammar is a TOML subset: `[dotted.section]`
// headers, `key = value` lines with quoted strings, integers, floats,
// booleans, and single-line string arrays, and `#` comments. See the
// README for the full grammar.
struct AppConfig {
  std::map<AgentRole, BackendConfig> backends;
  pipeline::PipelineConfig pipeline;
  sandbox::ToolchainMap toolchains = sandbox::default_toolchains();
  curation::CurationConfig curation;
  Paths paths;
  std::string raw;  // verbatim file text, stamped into run manifests
};

// Throws ConfigError with a line number on any grammar or key error.
AppConfig parse_config(const std::string& text);
AppConfig load_config(const std::filesystem::path& path);

// Bearer token for a backend, from its api_key_env. Empty when the
// variable is unset or the config names none.
std::string api_key_for(const BackendConfig& backend);

using BackendFactory = std::function<std::shared_ptr<llm::ChatBackend>(
    AgentRole role, const BackendConfig& backend)>;

// Installs an endpoint on `gw` for every listed role. Throws ConfigError
// naming the first role without a backends entry. The factory decides the
// transport (live, replay, recording).
void wire_gateway(llm::Gateway& gw, const AppConfig& cfg,
                  const std::vector<AgentRole>& roles,
                  const BackendFactory& factory);

// Evaluation runs decode greedily; throws ConfigError naming the first
// listed role whose temperature is not zero.
void require_greedy(const AppConfig& cfg, const std::vector<AgentRole>& roles);

}  // namespace mapforge::config

#endif  // MAPFORGE_CONFIG_HPP_
