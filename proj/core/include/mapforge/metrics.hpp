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

#ifndef MAPFORGE_METRICS_HPP_
#define MAPFORGE_METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mapforge/corpus.hpp"
#include "mapforge/llm_gateway.hpp"
#include "mapforge/orchestrator.hpp"

namespace mapforge::metrics {

// Benchmark-level scores. Accuracy is the only rounded field; every count
// is exact. Format failures are ambiguous between "events" and "affected
// problems", so both are carried and both are rendered.
struct RunReport {
  std::string benchmark;
  std::size_t total_problems = 0;
  std::size_t pass_count = 0;
  double accuracy_pct = 0.0;
  std::size_t pass_without_debug = 0;
  std::size_t pass_with_debug = 0;
  std::size_t format_fail_events = 0;
  std::size_t format_fail_problems = 0;
  llm::CostLedger ledger;
  std::string config_snapshot;

  bool operator==(const RunReport&) const = default;
};

// 100 * passes / total, rounded half-up to 2 decimals. Throws ZeroTotal
// when total = 0.
double accuracy(std::size_t passes, std::size_t total);

// Scores one trajectory per benchmark problem. Throws CoverageMismatch
// when the trajectory ids are not exactly the benchmark ids.
RunReport score_run(const std::vector<pipeline::Trajectory>& trajs,
                    const corpus::BenchmarkManifest& benchmark);

enum class ReportFormat { Table, Json };

std::string render_report(const RunReport& r, ReportFormat format);

// Rendering helpers, fixed across the table and any future format:
// counts use thousands separators, token totals switch to a two-decimal
// M suffix at one million, durations pick the largest sensible unit.
std::string format_count(std::int64_t n);
std::string format_tokens(std::int64_t n);
std::string format_duration_ms(std::int64_t ms);

void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

}  // namespace mapforge::metrics

#endif  // MAPFORGE_METRICS_HPP_
