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

#include <benchmark/benchmark.h>

#include "mapforge/agent_xml.hpp"

namespace {

std::string plan_document(int plans) {
  std::string doc = "<root>\n";
  for (int i = 0; i < plans; ++i) {
    doc += "  <plan>\n    <steps>Sort the array, then sweep with two "
           "pointers while tracking the best window seen so far. Handle "
           "duplicates by skipping equal neighbours.</steps>\n"
           "    <confidence>" + std::to_string(50 + i % 50) +
           "</confidence>\n  </plan>\n";
  }
  doc += "</root>\n";
  return doc;
}

void BM_ParsePlans(benchmark::State& state) {
  const std::string doc = plan_document(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto result = mapforge::xml::parse_plans(doc);
    benchmark::DoNotOptimize(result);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(doc.size()));
}
BENCHMARK(BM_ParsePlans)->Arg(3)->Arg(16)->Arg(64);

void BM_RecoverPlans(benchmark::State& state) {
  std::string doc = plan_document(static_cast<int>(state.range(0)));
  doc.insert(doc.find("</root>"), "<notes>stray commentary</notes>");
  doc.resize(doc.find("</root>"));
  for (auto _ : state) {
    auto result = mapforge::xml::recover_plans(doc);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_RecoverPlans)->Arg(3)->Arg(16);

void BM_ExtractCode(benchmark::State& state) {
  std::string raw = "Here is the fix.\n\n```python\n";
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    raw += "def helper_" + std::to_string(i) + "(x):\n    return x * 2\n";
  }
  raw += "```\n";
  for (auto _ : state) {
    auto result = mapforge::xml::extract_code(raw, "python");
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_ExtractCode)->Arg(10)->Arg(200);

}  // namespace
