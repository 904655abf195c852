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

#include "mapforge/digest.hpp"
#include "mapforge/llm_gateway.hpp"

namespace {

void BM_Sha256(benchmark::State& state) {
  const std::string payload(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) {
    auto digest = mapforge::sha256_hex(payload);
    benchmark::DoNotOptimize(digest);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(1 << 10)->Arg(1 << 16)->Arg(1 << 20);

void BM_CassetteKey(benchmark::State& state) {
  mapforge::llm::ChatRequest req;
  req.model = "small-coder";
  req.temperature = 0.0;
  req.max_tokens = 2048;
  for (int i = 0; i < 6; ++i) {
    req.messages.push_back({mapforge::llm::MessageRole::User,
                            std::string(800, 'a' + i % 26)});
  }
  for (auto _ : state) {
    auto key = mapforge::llm::cassette_key(req);
    benchmark::DoNotOptimize(key);
  }
}
BENCHMARK(BM_CassetteKey);

}  // namespace
