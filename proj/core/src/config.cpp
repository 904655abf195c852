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

#include "mapforge/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#include "mapforge/errors.hpp"

namespace mapforge::config {

namespace {

using Value = std::variant<std::string, std::int64_t, double, bool,
                           std::vector<std::string>>;

struct Entry {
  Value value;
  std::size_t line = 0;
  bool used = false;
};

using Tree = std::map<std::string, Entry>;

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

// Cuts an unquoted `#` comment. Quotes toggle on unescaped `"`.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) {
      quoted = !quoted;
    } else if (s[i] == '#' && !quoted) {
      return s.substr(0, i);
    }
  }
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) {
    return false;
  }
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' &&
        c != '-') {
      return false;
    }
  }
  return true;
}

std::string parse_string(std::string_view raw, std::size_t line) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    fail(line, "expected a quoted string, got '" + std::string(raw) + "'");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (i + 2 >= raw.size()) {
      fail(line, "dangling escape in string");
    }
    ++i;
    switch (raw[i]) {
      case '"':
        out += '"';
        break;
      case '\\':
        out += '\\';
        break;
      case 'n':
        out += '\n';
        break;
      case 't':
        out += '\t';
        break;
      default:
        fail(line, std::string("unknown escape '\\") + raw[i] + "'");
    }
  }
  return out;
}

std::vector<std::string> parse_string_array(std::string_view raw,
                                            std::size_t line) {
  std::vector<std::string> out;
  std::string_view inner = trim(raw.substr(1, raw.size() - 2));
  while (!inner.empty()) {
    if (inner.front() != '"') {
      fail(line, "arrays hold quoted strings only");
    }
    std::size_t end = 1;
    while (end < inner.size() &&
           !(inner[end] == '"' && inner[end - 1] != '\\')) {
      ++end;
    }
    if (end >= inner.size()) {
      fail(line, "unterminated string in array");
    }
    out.push_back(parse_string(inner.substr(0, end + 1), line));
    inner = trim(inner.substr(end + 1));
    if (!inner.empty()) {
      if (inner.front() != ',') {
        fail(line, "expected ',' between array elements");
      }
      inner = trim(inner.substr(1));
    }
  }
  return out;
}

Value parse_value(std::string_view raw, std::size_t line) {
  if (raw.empty()) {
    fail(line, "missing value");
  }
  if (raw.front() == '"') {
    return parse_string(raw, line);
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') {
      fail(line, "unterminated array");
    }
    return parse_string_array(raw, line);
  }
  if (raw == "true") {
    return true;
  }
  if (raw == "false") {
    return false;
  }
  std::int64_t i = 0;
  auto [iptr, ierr] = std::from_chars(raw.begin(), raw.end(), i);
  if (ierr == std::errc{} && iptr == raw.end()) {
    return i;
  }
  const std::string text(raw);
  char* dend = nullptr;
  const double d = std::strtod(text.c_str(), &dend);
  if (dend == text.c_str() + text.size() && !text.empty()) {
    return d;
  }
  fail(line, "cannot parse value '" + text + "'");
}

Tree parse_tree(const std::string& text) {
  Tree tree;
  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw_line));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(line_no, "unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) {
        fail(line_no, "bad section name '" + section + "'");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(line_no, "expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) {
      fail(line_no, "bad key '" + key + "'");
    }
    if (!section.empty()) {
      key = section + "." + key;
    }
    if (tree.contains(key)) {
      fail(line_no, "duplicate key '" + key + "'");
    }
    tree[key] = Entry{parse_value(trim(line.substr(eq + 1)), line_no), line_no,
                      false};
  }
  return tree;
}

template <typename T>
const T* get_as(Tree& tree, const std::string& key) {
  auto it = tree.find(key);
  if (it == tree.end()) {
    return nullptr;
  }
  it->second.used = true;
  if constexpr (std::is_same_v<T, double>) {
    // Integers promote to floats where a float is expected.
    if (const auto* i = std::get_if<std::int64_t>(&it->second.value)) {
      static thread_local double promoted;
      promoted = static_cast<double>(*i);
      return &promoted;
    }
  }
  const T* v = std::get_if<T>(&it->second.value);
  if (!v) {
    fail(it->second.line, "wrong type for '" + key + "'");
  }
  return v;
}

template <typename T, typename U>
void assign_if(Tree& tree, const std::string& key, U& target) {
  if (const T* v = get_as<T>(tree, key)) {
    target = static_cast<U>(*v);
  }
}

// Section prefixes we own; unknown keys under them are typos worth failing
// on, anything else is rejected outright.
bool known_prefix(const std::string& key) {
  static const char* prefixes[] = {"backends.", "pipeline.", "toolchains.",
                                   "curation.", "paths."};
  for (const char* p : prefixes) {
    if (key.rfind(p, 0) == 0) {
      return true;
    }
  }
  return false;
}

}  // namespace

AppConfig parse_config(const std::string& text) {
  Tree tree = parse_tree(text);
  AppConfig cfg;
  cfg.raw = text;

  for (AgentRole role :
       {AgentRole::Retrieval, AgentRole::Planning, AgentRole::Coding,
        AgentRole::Debugging, AgentRole::Supervisor}) {
    const std::string prefix =
        "backends." + std::string(to_string(role)) + ".";
    BackendConfig b;
    bool any = false;
    if (const auto* v = get_as<std::string>(tree, prefix + "base_url")) {
      b.base_url = *v;
      any = true;
    }
    if (const auto* v = get_as<std::string>(tree, prefix + "model")) {
      b.model = *v;
      any = true;
    }
    if (const auto* v = get_as<double>(tree, prefix + "temperature")) {
      b.temperature = *v;
      any = true;
    }
    if (const auto* v = get_as<std::int64_t>(tree, prefix + "max_tokens")) {
      b.max_tokens = static_cast<int>(*v);
      any = true;
    }
    if (const auto* v = get_as<std::string>(tree, prefix + "api_key_env")) {
      b.api_key_env = *v;
      any = true;
    }
    if (any) {
      cfg.backends[role] = std::move(b);
    }
  }

  assign_if<std::int64_t>(tree, "pipeline.plan_count", cfg.pipeline.plan_count);
  assign_if<std::int64_t>(tree, "pipeline.debug_rounds",
                          cfg.pipeline.debug_rounds);
  assign_if<std::int64_t>(tree, "pipeline.format_retries",
                          cfg.pipeline.format_retries);
  assign_if<double>(tree, "pipeline.time_limit_s",
                    cfg.pipeline.limits.time_limit_s);
  assign_if<std::int64_t>(tree, "pipeline.memory_limit_mb",
                          cfg.pipeline.limits.memory_limit_mb);
  assign_if<std::int64_t>(tree, "pipeline.output_limit_kb",
                          cfg.pipeline.limits.output_limit_kb);
  if (cfg.pipeline.plan_count < 1) {
    throw ConfigError("pipeline.plan_count must be at least 1");
  }
  if (cfg.pipeline.debug_rounds < 0 || cfg.pipeline.format_retries < 0) {
    throw ConfigError("pipeline debug_rounds and format_retries must be >= 0");
  }

  // Toolchain sections add to or override the built-in map.
  std::vector<std::string> languages;
  for (const auto& [key, entry] : tree) {
    (void)entry;
    if (key.rfind("toolchains.", 0) == 0) {
      const std::string rest = key.substr(11);
      const std::size_t dot = rest.find('.');
      if (dot != std::string::npos) {
        const std::string lang = rest.substr(0, dot);
        if (std::find(languages.begin(), languages.end(), lang) ==
            languages.end()) {
          languages.push_back(lang);
        }
      }
    }
  }
  for (const std::string& lang : languages) {
    const std::string prefix = "toolchains." + lang + ".";
    sandbox::Toolchain tc;
    if (auto it = cfg.toolchains.find(lang); it != cfg.toolchains.end()) {
      tc = it->second;
    }
    assign_if<std::string>(tree, prefix + "compile_cmd", tc.compile_cmd);
    assign_if<std::string>(tree, prefix + "run_cmd", tc.run_cmd);
    assign_if<std::string>(tree, prefix + "file_ext", tc.file_ext);
    cfg.toolchains[lang] = std::move(tc);
  }

  assign_if<std::int64_t>(tree, "curation.max_supervision_rounds",
                          cfg.curation.max_supervision_rounds);
  if (cfg.curation.max_supervision_rounds < 1) {
    throw ConfigError("curation.max_supervision_rounds must be at least 1");
  }

  assign_if<std::string>(tree, "paths.runs", cfg.paths.runs);
  assign_if<std::string>(tree, "paths.cassettes", cfg.paths.cassettes);
  assign_if<std::string>(tree, "paths.corpora", cfg.paths.corpora);

  for (const auto& [key, entry] : tree) {
    if (!entry.used) {
      if (!known_prefix(key)) {
        fail(entry.line, "unknown key '" + key + "'");
      }
      fail(entry.line, "unknown key '" + key + "' in a known section");
    }
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read config: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string api_key_for(const BackendConfig& backend) {
  if (backend.api_key_env.empty()) {
    return {};
  }
  const char* value = std::getenv(backend.api_key_env.c_str());
  return value ? value : "";
}

void wire_gateway(llm::Gateway& gw, const AppConfig& cfg,
                  const std::vector<AgentRole>& roles,
                  const BackendFactory& factory) {
  for (AgentRole role : roles) {
    const auto it = cfg.backends.find(role);
    if (it == cfg.backends.end()) {
      throw ConfigError("no [backends." + std::string(to_string(role)) +
                        "] section in the config");
    }
    llm::Gateway::RoleEndpoint ep;
    ep.backend = factory(role, it->second);
    ep.model = it->second.model;
    ep.temperature = it->second.temperature;
    ep.max_tokens = it->second.max_tokens;
    gw.set_role(role, std::move(ep));
  }
}

void require_greedy(const AppConfig& cfg, const std::vector<AgentRole>& roles) {
  for (AgentRole role : roles) {
    const auto it = cfg.backends.find(role);
    if (it != cfg.backends.end() && it->second.temperature != 0.0) {
      throw ConfigError("evaluation runs decode greedily: set [backends." +
                        std::string(to_string(role)) +
                        "] temperature = 0");
    }
  }
}

}  // namespace mapforge::config
