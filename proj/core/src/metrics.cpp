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

#include "mapforge/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mapforge/errors.hpp"
#include "mapforge/sandbox.hpp"

namespace mapforge::metrics {

using nlohmann::json;

namespace {

// floor(n / d + 1/2) without floating point, for non-negative n.
std::int64_t div_half_up(std::int64_t n, std::int64_t d) {
  return (2 * n + d) / (2 * d);
}

std::string two_decimals(std::int64_t hundredths) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld",
                static_cast<long long>(hundredths / 100),
                static_cast<long long>(hundredths % 100));
  return buf;
}

std::string table_row(std::string_view label, const std::string& value) {
  std::string row(label);
  if (row.size() < 22) {
    row.append(22 - row.size(), ' ');
  } else {
    row += ' ';
  }
  row += value;
  row += '\n';
  return row;
}

}  // namespace

double accuracy(std::size_t passes, std::size_t total) {
  if (total == 0) {
    throw ZeroTotalError("accuracy over zero problems");
  }
  const auto p = static_cast<std::int64_t>(passes);
  const auto t = static_cast<std::int64_t>(total);
  // Percent in exact hundredths: round_half_up(10000 * p / t).
  const std::int64_t hundredths = div_half_up(10000 * p, t);
  return static_cast<double>(hundredths) / 100.0;
}

RunReport score_run(const std::vector<pipeline::Trajectory>& trajs,
                    const corpus::BenchmarkManifest& benchmark) {
  std::multiset<std::string> traj_ids;
  std::multiset<std::string> bench_ids;
  for (const pipeline::Trajectory& t : trajs) {
    traj_ids.insert(t.problem_id);
  }
  for (const corpus::Problem& p : benchmark.problems) {
    bench_ids.insert(p.id);
  }
  if (traj_ids != bench_ids) {
    throw CoverageMismatchError(
        "trajectories cover " + std::to_string(traj_ids.size()) +
        " problems, benchmark has " + std::to_string(bench_ids.size()) +
        " (or the id sets differ)");
  }

  RunReport r;
  r.benchmark = benchmark.name;
  r.total_problems = benchmark.problems.size();
  for (const pipeline::Trajectory& t : trajs) {
    const bool passed = t.hidden_verdict &&
                        *t.hidden_verdict == sandbox::Verdict::Accepted;
    if (passed) {
      ++r.pass_count;
      if (t.debug_iterations_used == 0) {
        ++r.pass_without_debug;
      } else {
        ++r.pass_with_debug;
      }
    }
    std::size_t events = 0;
    for (const pipeline::StageRecord& s : t.stages) {
      events += s.failures.size();
    }
    r.format_fail_events += events;
    if (events > 0) {
      ++r.format_fail_problems;
    }
    r.ledger += t.ledger;
  }
  r.accuracy_pct = accuracy(r.pass_count, r.total_problems);
  return r;
}

std::string format_count(std::int64_t n) {
  std::string digits = std::to_string(n < 0 ? -n : n);
  std::string grouped;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) {
      grouped += ',';
    }
    grouped += digits[i];
  }
  return n < 0 ? "-" + grouped : grouped;
}

std::string format_tokens(std::int64_t n) {
  if (n < 1'000'000) {
    return format_count(n);
  }
  // Hundredths of a million, rounded half-up.
  return two_decimals(div_half_up(n, 10'000)) + "M";
}

std::string format_duration_ms(std::int64_t ms) {
  if (ms < 1'000) {
    return std::to_string(ms) + " ms";
  }
  if (ms < 60'000) {
    return two_decimals(div_half_up(ms, 10)) + " s";
  }
  if (ms < 3'600'000) {
    return two_decimals(div_half_up(ms, 600)) + " min";
  }
  return two_decimals(div_half_up(ms, 36'000)) + " h";
}

std::string render_report(const RunReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) {
    json j = r;
    j["report_version"] = 1;
    return j.dump(2) + "\n";
  }
  std::string out;
  out += table_row("benchmark", r.benchmark);
  out += table_row("problems", format_count(
                                   static_cast<std::int64_t>(r.total_problems)));
  out += table_row("accuracy",
                   two_decimals(div_half_up(
                       static_cast<std::int64_t>(r.accuracy_pct * 10000.0), 100)) +
                       "%");
  out += table_row("pass count",
                   format_count(static_cast<std::int64_t>(r.pass_count)));
  out += table_row("pass w/o debug", format_count(static_cast<std::int64_t>(
                                         r.pass_without_debug)));
  out += table_row("pass w/ debug", format_count(static_cast<std::int64_t>(
                                        r.pass_with_debug)));
  out += table_row("format fail events",
                   format_count(static_cast<std::int64_t>(r.format_fail_events)));
  out += table_row("format fail problems",
                   format_count(
                       static_cast<std::int64_t>(r.format_fail_problems)));
  out += table_row("runtime", format_duration_ms(r.ledger.wall_time_ms));
  out += table_row("input tokens", format_tokens(r.ledger.input_tokens));
  out += table_row("output tokens", format_tokens(r.ledger.output_tokens));
  out += table_row("calls", format_count(r.ledger.calls));
  if (!r.config_snapshot.empty()) {
    out += "config:\n";
    std::istringstream lines(r.config_snapshot);
    std::string line;
    while (std::getline(lines, line)) {
      out += "  " + line + "\n";
    }
  }
  return out;
}

void to_json(json& j, const RunReport& r) {
  j = json{{"benchmark", r.benchmark},
           {"total_problems", r.total_problems},
           {"pass_count", r.pass_count},
           {"accuracy_pct", r.accuracy_pct},
           {"pass_without_debug", r.pass_without_debug},
           {"pass_with_debug", r.pass_with_debug},
           {"format_fail_events", r.format_fail_events},
           {"format_fail_problems", r.format_fail_problems},
           {"ledger", r.ledger},
           {"config_snapshot", r.config_snapshot}};
}

void from_json(const json& j, RunReport& r) {
  r.benchmark = j.at("benchmark").get<std::string>();
  r.total_problems = j.at("total_problems").get<std::size_t>();
  r.pass_count = j.at("pass_count").get<std::size_t>();
  r.accuracy_pct = j.at("accuracy_pct").get<double>();
  r.pass_without_debug = j.at("pass_without_debug").get<std::size_t>();
  r.pass_with_debug = j.at("pass_with_debug").get<std::size_t>();
  r.format_fail_events = j.at("format_fail_events").get<std::size_t>();
  r.format_fail_problems = j.at("format_fail_problems").get<std::size_t>();
  r.ledger = j.at("ledger").get<llm::CostLedger>();
  r.config_snapshot = j.value("config_snapshot", std::string{});
}

}  // namespace mapforge::metrics
