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

#include "mapforge/emitter.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "mapforge/digest.hpp"
#include "mapforge/errors.hpp"

namespace mapforge::emitter {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Same-directory temp file so the final rename stays on one filesystem.
void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + tmp.string());
    }
    out << content;
    if (!out.flush()) {
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string());
  }
}

}  // namespace

std::string_view to_string(Projection p) {
  switch (p) {
    case Projection::Query:
      return "query";
    case Projection::Key:
      return "key";
    case Projection::Value:
      return "value";
    case Projection::Output:
      return "output";
  }
  return "query";
}

std::optional<Projection> projection_from_string(std::string_view name) {
  if (name == "query") {
    return Projection::Query;
  }
  if (name == "key") {
    return Projection::Key;
  }
  if (name == "value") {
    return Projection::Value;
  }
  if (name == "output") {
    return Projection::Output;
  }
  return std::nullopt;
}

std::size_t write_corpus(const std::vector<curation::TrainingExample>& examples,
                         AgentRole role, const fs::path& path) {
  for (const curation::TrainingExample& ex : examples) {
    if (ex.role != role) {
      throw RoleMismatchError("corpus for role '" +
                              std::string(to_string(role)) +
                              "' given an example for role '" +
                              std::string(to_string(ex.role)) + "'");
    }
  }
  std::string content;
  for (const curation::TrainingExample& ex : examples) {
    content += json(ex).dump();
    content += '\n';
  }
  write_atomic(path, content);
  return examples.size();
}

std::vector<curation::TrainingExample> load_corpus(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read corpus: " + path.string());
  }
  std::vector<curation::TrainingExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      out.push_back(json::parse(line).get<curation::TrainingExample>());
    } catch (const std::exception& e) {
      throw SchemaError(line_no, "example", e.what());
    }
  }
  return out;
}

AdapterManifest make_manifest(AgentRole role, const fs::path& corpus_path,
                              const ManifestOverrides& overrides) {
  AdapterManifest m;
  m.role = role;
  m.corpus_path = corpus_path.string();
  m.corpus_digest = sha256_file_hex(corpus_path);
  if (overrides.base_model) {
    m.base_model = *overrides.base_model;
  }
  if (overrides.adapter_rank) {
    m.adapter_rank = *overrides.adapter_rank;
  }
  if (overrides.target_projections) {
    m.target_projections = *overrides.target_projections;
  }
  if (overrides.learning_rate) {
    m.learning_rate = *overrides.learning_rate;
  }
  if (overrides.gradient_accumulation) {
    m.gradient_accumulation = *overrides.gradient_accumulation;
  }
  if (overrides.epochs) {
    m.epochs = *overrides.epochs;
  }
  if (overrides.tuned) {
    m.tuned = *overrides.tuned;
  }
  return m;
}

void write_manifest(const AdapterManifest& manifest, const fs::path& path) {
  write_atomic(path, json(manifest).dump(2) + "\n");
}

AdapterManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read manifest: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str()).get<AdapterManifest>();
  } catch (const std::exception& e) {
    throw SchemaError(1, "manifest", e.what());
  }
}

bool verify_manifest(const fs::path& manifest_path, std::string* reason) {
  const auto fail = [&](std::string why) {
    if (reason) {
      *reason = std::move(why);
    }
    return false;
  };
  AdapterManifest m;
  try {
    m = load_manifest(manifest_path);
  } catch (const Error& e) {
    return fail(e.what());
  }
  if (m.adapter_rank <= 0) {
    return fail("adapter_rank must be positive");
  }
  if (m.target_projections.empty()) {
    return fail("target_projections is empty");
  }
  fs::path corpus = m.corpus_path;
  if (corpus.is_relative()) {
    corpus = manifest_path.parent_path() / corpus;
  }
  std::string digest;
  try {
    digest = sha256_file_hex(corpus);
  } catch (const Error& e) {
    return fail(e.what());
  }
  if (digest != m.corpus_digest) {
    return fail("corpus digest mismatch: manifest has " + m.corpus_digest +
                ", file is " + digest);
  }
  return true;
}

void to_json(json& j, const AdapterManifest& m) {
  json projections = json::array();
  for (Projection p : m.target_projections) {
    projections.push_back(to_string(p));
  }
  j = json{{"role", to_string(m.role)},
           {"base_model", m.base_model},
           {"adapter_rank", m.adapter_rank},
           {"target_projections", projections},
           {"learning_rate", m.learning_rate},
           {"gradient_accumulation", m.gradient_accumulation},
           {"epochs", m.epochs},
           {"tuned", m.tuned},
           {"corpus_path", m.corpus_path},
           {"corpus_digest", m.corpus_digest}};
}

void from_json(const json& j, AdapterManifest& m) {
  const auto role = role_from_string(j.at("role").get<std::string>());
  if (!role) {
    throw Error("unknown agent role: " + j.at("role").get<std::string>());
  }
  m.role = *role;
  m.base_model = j.value("base_model", std::string{});
  m.adapter_rank = j.at("adapter_rank").get<int>();
  m.target_projections.clear();
  for (const json& entry : j.at("target_projections")) {
    const auto p = projection_from_string(entry.get<std::string>());
    if (!p) {
      throw Error("unknown projection: " + entry.get<std::string>());
    }
    m.target_projections.push_back(*p);
  }
  m.learning_rate = j.at("learning_rate").get<double>();
  m.gradient_accumulation = j.at("gradient_accumulation").get<int>();
  m.epochs = j.at("epochs").get<int>();
  m.tuned = j.value("tuned", false);
  m.corpus_path = j.at("corpus_path").get<std::string>();
  m.corpus_digest = j.at("corpus_digest").get<std::string>();
}

}  // namespace mapforge::emitter
