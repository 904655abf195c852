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

#ifndef MAPFORGE_EMITTER_HPP_
#define MAPFORGE_EMITTER_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mapforge/curator.hpp"
#include "mapforge/roles.hpp"

namespace mapforge::emitter {

enum class Projection { Query, Key, Value, Output };

std::string_view to_string(Projection p);
std::optional<Projection> projection_from_string(std::string_view name);

// Declarative handoff to an external trainer; no gradients computed here.
// Hyperparameters default to the shared training configuration; tuned stays
// false until someone actually tunes a role.
struct AdapterManifest {
  AgentRole role = AgentRole::Retrieval;
  std::string base_model;
  int adapter_rank = 32;
  std::vector<Projection> target_projections = {
      Projection::Query, Projection::Key, Projection::Value,
      Projection::Output};
  double learning_rate = 2e-5;
  int gradient_accumulation = 16;
  int epochs = 3;
  bool tuned = false;
  std::string corpus_path;
  std::string corpus_digest;  // SHA-256 over the corpus file bytes

  bool operator==(const AdapterManifest&) const = default;
};

struct ManifestOverrides {
  std::optional<std::string> base_model;
  std::optional<int> adapter_rank;
  std::optional<std::vector<Projection>> target_projections;
  std::optional<double> learning_rate;
  std::optional<int> gradient_accumulation;
  std::optional<int> epochs;
  std::optional<bool> tuned;
};

// Writes one JSON record per line, atomically (temp file + rename), and
// returns the count written. The file always ends with a newline. Throws
// RoleMismatch when any example carries a different role.
std::size_t write_corpus(const std::vector<curation::TrainingExample>& examples,
                         AgentRole role, const std::filesystem::path& path);

std::vector<curation::TrainingExample> load_corpus(
    const std::filesystem::path& path);

// Builds a manifest for the corpus at corpus_path: defaults plus overrides,
// digest over the file bytes. Throws IoError when the corpus is unreadable.
AdapterManifest make_manifest(AgentRole role,
                              const std::filesystem::path& corpus_path,
                              const ManifestOverrides& overrides = {});

// Single JSON document, written atomically.
void write_manifest(const AdapterManifest& manifest,
                    const std::filesystem::path& path);

AdapterManifest load_manifest(const std::filesystem::path& path);

// True iff the manifest's invariants hold and the digest matches the corpus
// file as it exists now. Relative corpus paths resolve against the manifest
// directory. On false, `reason` (when given) says what broke.
bool verify_manifest(const std::filesystem::path& manifest_path,
                     std::string* reason = nullptr);

void to_json(nlohmann::json& j, const AdapterManifest& m);
void from_json(const nlohmann::json& j, AdapterManifest& m);

}  // namespace mapforge::emitter

#endif  // MAPFORGE_EMITTER_HPP_
