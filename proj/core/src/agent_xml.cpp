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

#include "mapforge/agent_xml.hpp"

#include "mapforge/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <nlohmann/json.hpp>

namespace mapforge::xml {

using nlohmann::json;

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::NotWellFormed:
      return "not_well_formed";
    case FailureKind::MissingTag:
      return "missing_tag";
    case FailureKind::UnclosedTag:
      return "unclosed_tag";
    case FailureKind::UnexpectedTag:
      return "unexpected_tag";
    case FailureKind::BadConfidence:
      return "bad_confidence";
    case FailureKind::NoCodeBlock:
      return "no_code_block";
  }
  return "unknown";
}

std::optional<FailureKind> failure_kind_from_string(std::string_view name) {
  if (name == "not_well_formed") return FailureKind::NotWellFormed;
  if (name == "missing_tag") return FailureKind::MissingTag;
  if (name == "unclosed_tag") return FailureKind::UnclosedTag;
  if (name == "unexpected_tag") return FailureKind::UnexpectedTag;
  if (name == "bad_confidence") return FailureKind::BadConfidence;
  if (name == "no_code_block") return FailureKind::NoCodeBlock;
  return std::nullopt;
}

namespace {

constexpr std::size_t kMaxDepth = 64;
constexpr std::size_t kSnippetLen = 40;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string snippet(std::string_view s) {
  const std::string t = trim(s);
  if (t.size() <= kSnippetLen) {
    return t;
  }
  return t.substr(0, kSnippetLen) + "...";
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string unescape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '&') {
      if (s.compare(i, 5, "&amp;") == 0) {
        out.push_back('&');
        i += 5;
        continue;
      }
      if (s.compare(i, 4, "&lt;") == 0) {
        out.push_back('<');
        i += 4;
        continue;
      }
      if (s.compare(i, 4, "&gt;") == 0) {
        out.push_back('>');
        i += 4;
        continue;
      }
      if (s.compare(i, 6, "&quot;") == 0) {
        out.push_back('"');
        i += 6;
        continue;
      }
      if (s.compare(i, 6, "&apos;") == 0) {
        out.push_back('\'');
        i += 6;
        continue;
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

struct Node {
  std::string name;
  std::string text;
  std::vector<Node> children;
  bool known = true;
};

struct RoleSchema {
  AgentRole role;
  std::string root;
  std::set<std::string, std::less<>> known_tags;
};

const RoleSchema& retrieval_schema() {
  static const RoleSchema s{AgentRole::Retrieval,
                            "root",
                            {"root", "algorithm", "tutorial"}};
  return s;
}

const RoleSchema& planning_schema() {
  static const RoleSchema s{AgentRole::Planning,
                            "root",
                            {"root", "plan", "steps", "confidence"}};
  return s;
}

const RoleSchema& supervisor_schema() {
  static const RoleSchema s{AgentRole::Supervisor,
                            "verdict",
                            {"verdict", "agent", "feedback"}};
  return s;
}

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Builds a tolerant element tree. Unknown tags are flagged and kept in the
// tree (marked) so recovery can drop them; unclosed tags are implicitly
// closed at the surrounding close tag or at end of input; diagnostics record
// every strict-schema violation seen along the way.
Node tolerant_parse(std::string_view raw, const RoleSchema& schema,
                    std::vector<FormatFailure>& diags) {
  std::vector<Node> stack;
  stack.push_back(Node{});  // document node, name ""

  auto add = [&](FailureKind kind, std::string detail) {
    diags.push_back(FormatFailure{schema.role, kind, std::move(detail)});
  };
  auto attach_top = [&] {
    Node top = std::move(stack.back());
    stack.pop_back();
    stack.back().children.push_back(std::move(top));
  };

  std::size_t i = 0;
  const std::size_t n = raw.size();
  bool depth_reported = false;
  while (i < n) {
    const char c = raw[i];
    if (c != '<') {
      stack.back().text.push_back(c);
      ++i;
      continue;
    }
    if (i + 1 >= n || (!is_name_start(raw[i + 1]) && raw[i + 1] != '/')) {
      stack.back().text.push_back(c);
      ++i;
      continue;
    }
    const bool closing = raw[i + 1] == '/';
    std::size_t p = i + (closing ? 2 : 1);
    std::size_t name_begin = p;
    while (p < n && is_name_char(raw[p])) ++p;
    std::string name(raw.substr(name_begin, p - name_begin));
    const std::size_t gt = raw.find('>', p);
    if (name.empty() || gt == std::string_view::npos) {
      add(FailureKind::NotWellFormed, snippet(raw.substr(i)));
      // Swallow the broken tag fragment so it is not re-reported as text.
      i = n;
      break;
    }
    const bool self_closing = gt > i && raw[gt - 1] == '/';
    i = gt + 1;

    if (closing) {
      std::size_t match = 0;
      for (std::size_t j = stack.size(); j-- > 1;) {
        if (stack[j].name == name) {
          match = j;
          break;
        }
      }
      if (match == 0) {
        add(FailureKind::UnexpectedTag, "/" + name);
        continue;
      }
      while (stack.size() - 1 > match) {
        if (stack.back().known) {
          add(FailureKind::UnclosedTag, stack.back().name);
        }
        attach_top();
      }
      attach_top();
      continue;
    }

    Node node;
    node.name = name;
    node.known = schema.known_tags.count(name) > 0;
    if (!node.known) {
      add(FailureKind::UnexpectedTag, name);
    }
    if (stack.size() >= kMaxDepth) {
      if (!depth_reported) {
        add(FailureKind::NotWellFormed, "nesting too deep");
        depth_reported = true;
      }
      continue;
    }
    if (self_closing) {
      stack.back().children.push_back(std::move(node));
    } else {
      stack.push_back(std::move(node));
    }
  }

  while (stack.size() > 1) {
    if (stack.back().known) {
      add(FailureKind::UnclosedTag, stack.back().name);
    }
    attach_top();
  }
  return std::move(stack.front());
}

bool has_any_element(const Node& node) {
  return !node.children.empty();
}

// Document-level checks shared by every XML role schema. Returns the root
// element if present.
const Node* check_document(const Node& doc, const RoleSchema& schema,
                           std::vector<FormatFailure>& diags,
                           bool strict_outside) {
  auto add = [&](FailureKind kind, std::string detail) {
    diags.push_back(FormatFailure{schema.role, kind, std::move(detail)});
  };
  if (!has_any_element(doc)) {
    diags.clear();
    add(FailureKind::NotWellFormed,
        doc.text.empty() ? "empty response" : snippet(doc.text));
    return nullptr;
  }
  if (strict_outside && !trim(doc.text).empty()) {
    add(FailureKind::NotWellFormed, snippet(doc.text));
  }
  const Node* root = nullptr;
  for (const Node& child : doc.children) {
    if (child.name == schema.root) {
      if (root == nullptr) {
        root = &child;
      } else if (strict_outside) {
        add(FailureKind::UnexpectedTag, child.name);
      }
    } else if (child.known && strict_outside) {
      add(FailureKind::UnexpectedTag, child.name);
    }
  }
  if (root == nullptr) {
    add(FailureKind::MissingTag, schema.root);
  }
  return root;
}

// Collects children of `parent` named `name`, reporting duplicates beyond
// the first as unexpected when requested.
std::vector<const Node*> named_children(const Node& parent,
                                        std::string_view name) {
  std::vector<const Node*> out;
  for (const Node& child : parent.children) {
    if (child.name == name) {
      out.push_back(&child);
    }
  }
  return out;
}

std::string node_text(const Node& node) {
  return trim(unescape_text(node.text));
}

std::optional<RetrievalOutput> extract_retrieval(
    const Node& root, std::vector<FormatFailure>& diags) {
  auto add = [&](FailureKind kind, std::string detail) {
    diags.push_back(
        FormatFailure{AgentRole::Retrieval, kind, std::move(detail)});
  };
  RetrievalOutput out;
  const auto algos = named_children(root, "algorithm");
  if (algos.empty() || node_text(*algos.front()).empty()) {
    add(FailureKind::MissingTag, "algorithm");
  } else {
    out.algorithm_name = node_text(*algos.front());
  }
  for (std::size_t i = 1; i < algos.size(); ++i) {
    add(FailureKind::UnexpectedTag, "algorithm");
  }
  const auto tuts = named_children(root, "tutorial");
  if (tuts.empty() || node_text(*tuts.front()).empty()) {
    add(FailureKind::MissingTag, "tutorial");
  } else {
    out.tutorial = node_text(*tuts.front());
  }
  for (std::size_t i = 1; i < tuts.size(); ++i) {
    add(FailureKind::UnexpectedTag, "tutorial");
  }
  if (out.algorithm_name.empty() || out.tutorial.empty()) {
    return std::nullopt;
  }
  return out;
}

std::optional<PlanSet> extract_plans(const Node& root,
                                     std::vector<FormatFailure>& diags) {
  auto add = [&](FailureKind kind, std::string detail) {
    diags.push_back(
        FormatFailure{AgentRole::Planning, kind, std::move(detail)});
  };
  const auto plans = named_children(root, "plan");
  if (plans.empty()) {
    add(FailureKind::MissingTag, "plan");
    return std::nullopt;
  }
  PlanSet out;
  bool ok = true;
  for (const Node* plan : plans) {
    Plan parsed;
    const auto steps = named_children(*plan, "steps");
    if (steps.empty() || node_text(*steps.front()).empty()) {
      add(FailureKind::MissingTag, "steps");
      ok = false;
    } else {
      parsed.steps = node_text(*steps.front());
    }
    for (std::size_t i = 1; i < steps.size(); ++i) {
      add(FailureKind::UnexpectedTag, "steps");
      ok = false;
    }
    const auto confs = named_children(*plan, "confidence");
    if (confs.empty()) {
      add(FailureKind::BadConfidence, "missing");
      ok = false;
    } else {
      const std::string text = node_text(*confs.front());
      int value = 0;
      const char* begin = text.data();
      const char* end = begin + text.size();
      const auto [ptr, ec] = std::from_chars(begin, end, value, 10);
      if (text.empty() || ec != std::errc{} || ptr != end || value < 0 ||
          value > 100) {
        add(FailureKind::BadConfidence, text.empty() ? "empty" : text);
        ok = false;
      } else {
        parsed.confidence = value;
      }
      for (std::size_t i = 1; i < confs.size(); ++i) {
        add(FailureKind::UnexpectedTag, "confidence");
        ok = false;
      }
    }
    out.plans.push_back(std::move(parsed));
  }
  if (!ok) {
    return std::nullopt;
  }
  return out;
}

std::optional<BlameReport> extract_supervisor(
    const Node& root, std::vector<FormatFailure>& diags) {
  auto add = [&](FailureKind kind, std::string detail) {
    diags.push_back(
        FormatFailure{AgentRole::Supervisor, kind, std::move(detail)});
  };
  BlameReport out;
  bool ok = true;
  const auto agents = named_children(root, "agent");
  if (agents.empty() || node_text(*agents.front()).empty()) {
    add(FailureKind::MissingTag, "agent");
    ok = false;
  } else {
    const std::string name = lower(node_text(*agents.front()));
    if (name == "retrieval") {
      out.blamed_role = AgentRole::Retrieval;
    } else if (name == "planning") {
      out.blamed_role = AgentRole::Planning;
    } else if (name == "coding") {
      out.blamed_role = AgentRole::Coding;
    } else {
      add(FailureKind::UnexpectedTag, name);
      ok = false;
    }
  }
  const auto feedbacks = named_children(root, "feedback");
  if (feedbacks.empty() || node_text(*feedbacks.front()).empty()) {
    add(FailureKind::MissingTag, "feedback");
    ok = false;
  } else {
    out.feedback = node_text(*feedbacks.front());
  }
  if (!ok) {
    return std::nullopt;
  }
  return out;
}

template <typename T, typename Extract>
ParseResult<T> strict_parse(std::string_view raw, const RoleSchema& schema,
                            Extract extract) {
  std::vector<FormatFailure> diags;
  if (trim(raw).empty()) {
    diags.push_back(
        FormatFailure{schema.role, FailureKind::NotWellFormed, "empty response"});
    return diags;
  }
  const Node doc = tolerant_parse(raw, schema, diags);
  const Node* root = check_document(doc, schema, diags, /*strict_outside=*/true);
  std::optional<T> value;
  if (root != nullptr) {
    value = extract(*root, diags);
  }
  if (!diags.empty() || !value) {
    if (diags.empty()) {
      diags.push_back(FormatFailure{schema.role, FailureKind::NotWellFormed,
                                    snippet(raw)});
    }
    return diags;
  }
  return *value;
}

template <typename T, typename Extract, typename Reparse>
std::optional<T> lenient_recover(std::string_view raw,
                                 const RoleSchema& schema, Extract extract,
                                 Reparse reparse) {
  std::vector<FormatFailure> build_diags;
  if (trim(raw).empty()) {
    return std::nullopt;
  }
  const Node doc = tolerant_parse(raw, schema, build_diags);
  std::vector<FormatFailure> doc_diags;
  const Node* root =
      check_document(doc, schema, doc_diags, /*strict_outside=*/false);
  if (root == nullptr) {
    return std::nullopt;
  }
  std::vector<FormatFailure> extract_diags;
  std::optional<T> value = extract(*root, extract_diags);
  if (!value || !extract_diags.empty()) {
    return std::nullopt;
  }
  // Soundness gate: the recovered value must round-trip through the strict
  // parser, or it is discarded.
  const ParseResult<T> check = reparse(to_xml(*value));
  if (!parsed_ok(check) || std::get<T>(check) != *value) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

ParseResult<RetrievalOutput> parse_retrieval(std::string_view raw) {
  return strict_parse<RetrievalOutput>(raw, retrieval_schema(),
                                       extract_retrieval);
}

ParseResult<PlanSet> parse_plans(std::string_view raw) {
  return strict_parse<PlanSet>(raw, planning_schema(), extract_plans);
}

ParseResult<BlameReport> parse_supervisor(std::string_view raw) {
  return strict_parse<BlameReport>(raw, supervisor_schema(),
                                   extract_supervisor);
}

std::variant<std::string, FormatFailure> extract_code(std::string_view raw,
                                                      std::string_view language,
                                                      AgentRole role) {
  struct Block {
    std::string info;
    std::string body;
  };
  std::vector<Block> blocks;
  std::optional<Block> open;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const std::size_t eol = raw.find('\n', pos);
    const std::string_view line =
        raw.substr(pos, eol == std::string_view::npos ? raw.size() - pos
                                                      : eol - pos);
    std::string_view stripped = line;
    while (!stripped.empty() && (stripped.front() == ' ')) {
      stripped.remove_prefix(1);
    }
    const bool fence_line = stripped.size() >= 3 &&
                            stripped.compare(0, 3, "```") == 0;
    if (fence_line) {
      if (!open) {
        std::string_view info = stripped.substr(3);
        while (!info.empty() && info.front() == '`') info.remove_prefix(1);
        open = Block{lower(trim(info)), ""};
      } else {
        blocks.push_back(std::move(*open));
        open.reset();
      }
    } else if (open) {
      open->body.append(line);
      open->body.push_back('\n');
    }
    if (eol == std::string_view::npos) {
      break;
    }
    pos = eol + 1;
  }
  if (open) {
    // Unterminated fence: runs to end of input (truncation-friendly).
    blocks.push_back(std::move(*open));
  }

  if (blocks.empty()) {
    return FormatFailure{role, FailureKind::NoCodeBlock, snippet(raw)};
  }
  const std::string wanted = lower(trim(language));
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (it->info == wanted) {
      return it->body;
    }
  }
  return blocks.back().body;
}

std::optional<RetrievalOutput> recover_retrieval(std::string_view raw) {
  return lenient_recover<RetrievalOutput>(raw, retrieval_schema(),
                                          extract_retrieval, parse_retrieval);
}

std::optional<PlanSet> recover_plans(std::string_view raw) {
  return lenient_recover<PlanSet>(raw, planning_schema(), extract_plans,
                                  parse_plans);
}

std::optional<BlameReport> recover_supervisor(std::string_view raw) {
  return lenient_recover<BlameReport>(raw, supervisor_schema(),
                                      extract_supervisor, parse_supervisor);
}

std::string to_xml(const RetrievalOutput& value) {
  return "<root>\n<algorithm>" + escape_text(value.algorithm_name) +
         "</algorithm>\n<tutorial>" + escape_text(value.tutorial) +
         "</tutorial>\n</root>";
}

std::string to_xml(const PlanSet& value) {
  std::string out = "<root>\n";
  for (const Plan& plan : value.plans) {
    out += "<plan>\n<steps>" + escape_text(plan.steps) +
           "</steps>\n<confidence>" + std::to_string(plan.confidence) +
           "</confidence>\n</plan>\n";
  }
  out += "</root>";
  return out;
}

std::string to_xml(const BlameReport& value) {
  std::string role;
  switch (value.blamed_role) {
    case AgentRole::Retrieval:
      role = "retrieval";
      break;
    case AgentRole::Planning:
      role = "planning";
      break;
    default:
      role = "coding";
      break;
  }
  return "<verdict>\n<agent>" + role + "</agent>\n<feedback>" +
         escape_text(value.feedback) + "</feedback>\n</verdict>";
}

std::string schema_outline(AgentRole role) {
  switch (role) {
    case AgentRole::Retrieval:
      return "<root>\n<algorithm>name of the relevant algorithm</algorithm>\n"
             "<tutorial>short tutorial on the approach</tutorial>\n</root>";
    case AgentRole::Planning:
      return "<root>\n<plan>\n<steps>numbered solution steps</steps>\n"
             "<confidence>integer 0-100</confidence>\n</plan>\n"
             "(emit one <plan> element per candidate plan)\n</root>";
    case AgentRole::Coding:
    case AgentRole::Debugging:
      return "a single fenced code block, e.g. ```<language> ... ```";
    case AgentRole::Supervisor:
      return "<verdict>\n<agent>retrieval|planning|coding</agent>\n"
             "<feedback>what went wrong and how to fix it</feedback>\n"
             "</verdict>";
  }
  return "";
}

std::string schema_table_json() {
  json roles = json::object();
  roles["retrieval"] = {
      {"kind", "xml"},
      {"root", "root"},
      {"elements",
       {{"root", {"algorithm", "tutorial"}}, {"algorithm", json::array()},
        {"tutorial", json::array()}}}};
  roles["planning"] = {
      {"kind", "xml"},
      {"root", "root"},
      {"elements",
       {{"root", {"plan"}},
        {"plan", {"steps", "confidence"}},
        {"steps", json::array()},
        {"confidence", json::array()}}},
      {"repeated", {"plan"}},
      {"confidence_range", {0, 100}}};
  roles["coding"] = {{"kind", "fenced_code"}};
  roles["debugging"] = {{"kind", "fenced_code"}};
  roles["supervisor"] = {
      {"kind", "xml"},
      {"root", "verdict"},
      {"elements",
       {{"verdict", {"agent", "feedback"}},
        {"agent", json::array()},
        {"feedback", json::array()}}},
      {"agent_values", {"retrieval", "planning", "coding"}}};
  const json table = {{"version", 1}, {"roles", roles}};
  return table.dump(2) + "\n";
}

void to_json(json& j, const FormatFailure& f) {
  j = json{{"role", std::string(mapforge::to_string(f.role))},
           {"kind", std::string(to_string(f.kind))},
           {"detail", f.detail}};
}

void from_json(const json& j, FormatFailure& f) {
  const auto role = role_from_string(j.at("role").get<std::string>());
  const auto kind = failure_kind_from_string(j.at("kind").get<std::string>());
  if (!role || !kind) {
    throw Error("bad format failure record");
  }
  f.role = *role;
  f.kind = *kind;
  f.detail = j.value("detail", std::string{});
}

void to_json(json& j, const RetrievalOutput& v) {
  j = json{{"algorithm", v.algorithm_name}, {"tutorial", v.tutorial}};
}

void from_json(const json& j, RetrievalOutput& v) {
  v.algorithm_name = j.at("algorithm").get<std::string>();
  v.tutorial = j.at("tutorial").get<std::string>();
}

void to_json(json& j, const Plan& p) {
  j = json{{"steps", p.steps}, {"confidence", p.confidence}};
}

void from_json(const json& j, Plan& p) {
  p.steps = j.at("steps").get<std::string>();
  p.confidence = j.at("confidence").get<int>();
}

void to_json(json& j, const PlanSet& p) { j = json{{"plans", p.plans}}; }

void from_json(const json& j, PlanSet& p) {
  p.plans = j.at("plans").get<std::vector<Plan>>();
}

void to_json(json& j, const BlameReport& b) {
  j = json{{"agent", std::string(mapforge::to_string(b.blamed_role))},
           {"feedback", b.feedback}};
}

void from_json(const json& j, BlameReport& b) {
  const auto role = role_from_string(j.at("agent").get<std::string>());
  if (!role) {
    throw Error("bad blame record");
  }
  b.blamed_role = *role;
  b.feedback = j.at("feedback").get<std::string>();
}

}  // namespace mapforge::xml
