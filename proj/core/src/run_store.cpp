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

#include "mapforge/run_store.hpp"

#include <atomic>
#include <cctype>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mapforge/errors.hpp"

namespace mapforge::runstore {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string now_utc_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string trajectory_file_name(std::string_view problem_id) {
  std::string name;
  name.reserve(problem_id.size());
  for (char c : problem_id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) ||
                      c == '.' || c == '_' || c == '-';
    name.push_back(safe ? c : '_');
  }
  if (name.empty()) {
    name = "_";
  }
  return name + ".jsonl";
}

void save_trajectory(const pipeline::Trajectory& traj, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write trajectory: " + path.string());
  }
  out << json(traj).dump() << '\n';
  for (const pipeline::StageRecord& stage : traj.stages) {
    out << json(stage).dump() << '\n';
  }
  if (!out) {
    throw IoError("trajectory write failed: " + path.string());
  }
}

pipeline::Trajectory load_trajectory(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read trajectory: " + path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  pipeline::Trajectory traj;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      const json record = json::parse(line);
      if (!have_meta) {
        traj = record.get<pipeline::Trajectory>();
        have_meta = true;
      } else {
        traj.stages.push_back(record.get<pipeline::StageRecord>());
      }
    } catch (const std::exception& e) {
      throw SchemaError(line_no, have_meta ? "stage" : "meta", e.what());
    }
  }
  if (!have_meta) {
    throw SchemaError(1, "meta", "empty trajectory file");
  }
  return traj;
}

RunManifest execute_run(
    const pipeline::Pipeline& pipe, const corpus::BenchmarkManifest& bench,
    const fs::path& run_dir, const RunOptions& opts,
    const std::function<void(const pipeline::Trajectory&)>& on_done) {
  if (fs::exists(run_dir)) {
    throw IoError("run directory already exists: " + run_dir.string());
  }
  fs::create_directories(run_dir / "trajectories");

  RunManifest manifest;
  manifest.benchmark_name = bench.name;
  manifest.problem_count = bench.problem_count;
  manifest.config = pipe.config();
  manifest.config_snapshot = opts.config_snapshot;
  manifest.mode = opts.mode;
  manifest.cassette_ref = opts.cassette_ref;
  manifest.started_at = now_utc_iso8601();

  corpus::write_benchmark(bench, run_dir / "problems.jsonl");

  std::vector<pipeline::Trajectory> results(bench.problems.size());
  std::atomic<std::size_t> next{0};
  std::mutex done_mu;
  std::exception_ptr first_error;

  const int jobs = std::max(1, opts.jobs);
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= bench.problems.size()) {
        return;
      }
      try {
        pipeline::Trajectory traj = pipe.run_problem(bench.problems[i]);
        {
          std::lock_guard lock(done_mu);
          if (on_done) {
            on_done(traj);
          }
        }
        results[i] = std::move(traj);
      } catch (...) {
        std::lock_guard lock(done_mu);
        if (!first_error) {
          first_error = std::current_exception();
        }
        next.store(bench.problems.size());
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }

  for (const pipeline::Trajectory& traj : results) {
    save_trajectory(traj,
                    run_dir / "trajectories" /
                        trajectory_file_name(traj.problem_id));
    manifest.ledger += traj.ledger;
  }

  manifest.finished_at = now_utc_iso8601();
  std::ofstream out(run_dir / "manifest.json", std::ios::trunc);
  if (!out) {
    throw IoError("cannot write manifest: " + (run_dir / "manifest.json").string());
  }
  out << json(manifest).dump(2) << '\n';
  return manifest;
}

RunManifest load_manifest(const fs::path& run_dir) {
  const fs::path path = run_dir / "manifest.json";
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const std::exception& e) {
    throw SchemaError(1, "manifest", e.what());
  }
  return j.get<RunManifest>();
}

corpus::BenchmarkManifest load_run_problems(const fs::path& run_dir) {
  corpus::BenchmarkManifest bench =
      corpus::load_benchmark(run_dir / "problems.jsonl");
  bench.name = load_manifest(run_dir).benchmark_name;
  return bench;
}

std::vector<pipeline::Trajectory> load_run_trajectories(
    const fs::path& run_dir) {
  const corpus::BenchmarkManifest bench =
      corpus::load_benchmark(run_dir / "problems.jsonl");
  std::vector<pipeline::Trajectory> out;
  out.reserve(bench.problems.size());
  for (const corpus::Problem& p : bench.problems) {
    out.push_back(load_trajectory(run_dir / "trajectories" /
                                  trajectory_file_name(p.id)));
  }
  return out;
}

void to_json(json& j, const RunManifest& m) {
  j = json{{"benchmark_name", m.benchmark_name},
           {"problem_count", m.problem_count},
           {"config", m.config},
           {"config_snapshot", m.config_snapshot},
           {"mode", m.mode},
           {"cassette_ref", m.cassette_ref},
           {"ledger", m.ledger},
           {"started_at", m.started_at},
           {"finished_at", m.finished_at}};
}

void from_json(const json& j, RunManifest& m) {
  m.benchmark_name = j.value("benchmark_name", std::string{});
  m.problem_count = j.value("problem_count", std::size_t{0});
  m.config = j.value("config", pipeline::PipelineConfig{});
  m.config_snapshot = j.value("config_snapshot", std::string{});
  m.mode = j.value("mode", std::string{});
  m.cassette_ref = j.value("cassette_ref", std::string{});
  m.ledger = j.value("ledger", llm::CostLedger{});
  m.started_at = j.value("started_at", std::string{});
  m.finished_at = j.value("finished_at", std::string{});
}

}  // namespace mapforge::runstore
