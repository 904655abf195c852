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

#ifndef MAPFORGE_RUN_STORE_HPP_
#define MAPFORGE_RUN_STORE_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mapforge/corpus.hpp"
#include "mapforge/llm_gateway.hpp"
#include "mapforge/orchestrator.hpp"

namespace mapforge::runstore {

// Run directory layout:
//   problems.jsonl        copy of the benchmark (self-describing runs)
//   trajectories/<id>.jsonl   meta line followed by one line per stage
//   manifest.json         config snapshot, mode, cassette ref, ledger,
//                         timestamps (the only place timestamps live)
struct RunManifest {
  std::string benchmark_name;
  std::size_t problem_count = 0;
  pipeline::PipelineConfig config;
  std::string config_snapshot;  // raw config file text
  std::string mode;             // replay | record | live
  std::string cassette_ref;
  llm::CostLedger ledger;       // sum over trajectory ledgers
  std::string started_at;       // ISO 8601 UTC
  std::string finished_at;
};

struct RunOptions {
  int jobs = 1;
  std::string mode = "replay";
  std::string cassette_ref;
  std::string config_snapshot;
};

// Trajectory files are line-delimited: the first line is the trajectory
// meta record, each following line one stage record in order.
void save_trajectory(const pipeline::Trajectory& traj,
                     const std::filesystem::path& path);
pipeline::Trajectory load_trajectory(const std::filesystem::path& path);

std::string trajectory_file_name(std::string_view problem_id);

// Runs every benchmark problem through the pipeline with a worker pool and
// writes the complete run directory. The directory must not already exist.
// on_done, if set, is invoked after each problem completes (any order).
RunManifest execute_run(
    const pipeline::Pipeline& pipe, const corpus::BenchmarkManifest& bench,
    const std::filesystem::path& run_dir, const RunOptions& opts,
    const std::function<void(const pipeline::Trajectory&)>& on_done = {});

RunManifest load_manifest(const std::filesystem::path& run_dir);
corpus::BenchmarkManifest load_run_problems(const std::filesystem::path& run_dir);

// Trajectories in benchmark problem order.
std::vector<pipeline::Trajectory> load_run_trajectories(
    const std::filesystem::path& run_dir);

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

}  // namespace mapforge::runstore

#endif  // MAPFORGE_RUN_STORE_HPP_
