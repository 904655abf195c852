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

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "mapforge/metrics.hpp"
#include "mapforge/orchestrator.hpp"

namespace {

using mapforge::corpus::BenchmarkManifest;
using mapforge::corpus::Problem;
using mapforge::pipeline::StageRecord;
using mapforge::pipeline::Trajectory;

std::pair<std::vector<Trajectory>, BenchmarkManifest> synthetic_run(int n) {
  BenchmarkManifest bench;
  bench.name = "synthetic";
  std::vector<Trajectory> trajs;
  for (int i = 0; i < n; ++i) {
    Problem p;
    p.id = "p" + std::to_string(i);
    p.statement = "echo";
    bench.problems.push_back(p);

    Trajectory t;
    t.problem_id = p.id;
    t.hidden_verdict = i % 3 == 0 ? mapforge::sandbox::Verdict::Accepted
                                  : mapforge::sandbox::Verdict::WrongAnswer;
    t.debug_iterations_used = i % 2;
    for (int s = 0; s < 4; ++s) {
      StageRecord rec;
      rec.usage.prompt_tokens = 900;
      rec.usage.completion_tokens = 250;
      rec.wall_time_ms = 1200;
      t.stages.push_back(rec);
      t.ledger.input_tokens += 900;
      t.ledger.output_tokens += 250;
      t.ledger.calls += 1;
      t.ledger.wall_time_ms += 1200;
    }
    trajs.push_back(std::move(t));
  }
  bench.problem_count = bench.problems.size();
  return {trajs, bench};
}

void BM_ScoreRun(benchmark::State& state) {
  const auto [trajs, bench] = synthetic_run(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto report = mapforge::metrics::score_run(trajs, bench);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_ScoreRun)->Arg(106)->Arg(1000);

void BM_RenderTable(benchmark::State& state) {
  const auto [trajs, bench] = synthetic_run(106);
  const auto report = mapforge::metrics::score_run(trajs, bench);
  for (auto _ : state) {
    auto text = mapforge::metrics::render_report(
        report, mapforge::metrics::ReportFormat::Table);
    benchmark::DoNotOptimize(text);
  }
}
BENCHMARK(BM_RenderTable);

}  // namespace
