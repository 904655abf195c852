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

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mapforge/config.hpp"
#include "mapforge/corpus.hpp"
#include "mapforge/curator.hpp"
#include "mapforge/emitter.hpp"
#include "mapforge/errors.hpp"
#include "mapforge/llm_gateway.hpp"
#include "mapforge/metrics.hpp"
#include "mapforge/orchestrator.hpp"
#include "mapforge/prompts.hpp"
#include "mapforge/run_store.hpp"
#include "mapforge/sandbox.hpp"

namespace fs = std::filesystem;
using namespace mapforge;

namespace {

constexpr const char* kVersion = "mapforge 0.1.0";

// Caps in-flight completions across every worker thread.
class ThrottledBackend : public llm::ChatBackend {
 public:
  ThrottledBackend(std::shared_ptr<llm::ChatBackend> inner,
                   std::shared_ptr<std::counting_semaphore<4096>> slots)
      : inner_(std::move(inner)), slots_(std::move(slots)) {}

  llm::ChatResponse complete(const llm::ChatRequest& req) override {
    slots_->acquire();
    try {
      llm::ChatResponse resp = inner_->complete(req);
      slots_->release();
      return resp;
    } catch (...) {
      slots_->release();
      throw;
    }
  }

  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<llm::ChatBackend> inner_;
  std::shared_ptr<std::counting_semaphore<4096>> slots_;
};

std::vector<AgentRole> pipeline_roles() {
  return {AgentRole::Retrieval, AgentRole::Planning, AgentRole::Coding,
          AgentRole::Debugging};
}

struct GatewayOptions {
  std::string mode = "replay";  // replay | record | live
  std::string cassette;
  int llm_jobs = 4;
};

// Builds the per-role transports for the requested mode and installs them.
// Replay shares one read-only cassette; record wraps live endpoints and
// appends every exchange to the cassette file.
void wire_backends(llm::Gateway& gw, const config::AppConfig& cfg,
                   const std::vector<AgentRole>& roles,
                   const GatewayOptions& opts) {
  auto slots = std::make_shared<std::counting_semaphore<4096>>(
      std::max(1, opts.llm_jobs));
  config::BackendFactory factory;

  if (opts.mode == "replay") {
    if (opts.cassette.empty()) {
      throw ConfigError("replay mode needs --cassette");
    }
    auto cassette = std::make_shared<const llm::Cassette>(
        llm::Cassette::load(opts.cassette));
    auto replay = std::make_shared<llm::ReplayBackend>(cassette);
    factory = [replay](AgentRole, const config::BackendConfig&) {
      return std::static_pointer_cast<llm::ChatBackend>(replay);
    };
  } else if (opts.mode == "record" || opts.mode == "live") {
    std::shared_ptr<llm::Cassette> sink;
    if (opts.mode == "record") {
      if (opts.cassette.empty()) {
        throw ConfigError("record mode needs --cassette");
      }
      sink = std::make_shared<llm::Cassette>();
      sink->open_sink(opts.cassette);
    }
    factory = [sink, slots](AgentRole, const config::BackendConfig& b) {
      if (b.base_url.empty()) {
        throw ConfigError("backend for model '" + b.model +
                          "' has no base_url");
      }
      std::shared_ptr<llm::ChatBackend> backend =
          std::make_shared<llm::HttpBackend>(b.base_url, config::api_key_for(b));
      if (sink) {
        backend = std::make_shared<llm::RecordingBackend>(backend, sink);
      }
      return std::static_pointer_cast<llm::ChatBackend>(
          std::make_shared<ThrottledBackend>(backend, slots));
    };
  } else {
    throw ConfigError("unknown mode '" + opts.mode +
                      "' (expected replay, record, or live)");
  }
  config::wire_gateway(gw, cfg, roles, factory);
}

prompts::PromptBuilder make_builder(const std::string& prompts_dir) {
  if (prompts_dir.empty()) {
    return prompts::PromptBuilder();
  }
  return prompts::PromptBuilder(prompts::PromptTemplates::load_dir(prompts_dir));
}

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// ---------------------------------------------------------------- import

struct ImportArgs {
  std::string adapter;
  std::string src;
  std::string out;
  std::string language = "python";
};

int cmd_import(const ImportArgs& a) {
  const corpus::BenchmarkManifest manifest =
      corpus::import_benchmark(a.adapter, a.src, a.language);
  corpus::write_benchmark(manifest, a.out);
  std::cerr << "imported " << manifest.problem_count << " problems to "
            << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------- run/record

struct RunArgs {
  std::string problems;
  std::string config;
  std::string out;
  GatewayOptions gw;
  std::string prompts_dir;
  int jobs = default_jobs();
};

int cmd_run(const RunArgs& a) {
  const config::AppConfig cfg = config::load_config(a.config);
  config::require_greedy(cfg, pipeline_roles());

  llm::Gateway gateway;
  wire_backends(gateway, cfg, pipeline_roles(), a.gw);

  const pipeline::Pipeline pipe(gateway, make_builder(a.prompts_dir),
                                cfg.pipeline, cfg.toolchains);
  const corpus::BenchmarkManifest bench = corpus::load_benchmark(a.problems);

  runstore::RunOptions opts;
  opts.jobs = a.jobs;
  opts.mode = a.gw.mode;
  opts.cassette_ref = a.gw.cassette;
  opts.config_snapshot = cfg.raw;

  std::mutex io_mu;
  const runstore::RunManifest manifest = runstore::execute_run(
      pipe, bench, a.out, opts, [&](const pipeline::Trajectory& t) {
        std::lock_guard lock(io_mu);
        std::cerr << t.problem_id << ": "
                  << (t.hidden_verdict
                          ? sandbox::to_string(*t.hidden_verdict)
                          : std::string_view("aborted"))
                  << "\n";
      });
  std::cerr << "run complete: " << manifest.problem_count << " problems, "
            << manifest.ledger.calls << " calls, written to " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------------ judge

struct JudgeArgs {
  std::string problems;
  std::string submissions;
  std::string config;
  int jobs = default_jobs();
};

fs::path find_submission(const fs::path& dir, const std::string& problem_id) {
  const std::string stem =
      fs::path(runstore::trajectory_file_name(problem_id)).stem().string();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().stem() == stem) {
      return entry.path();
    }
  }
  throw IoError("no submission named '" + stem + ".*' in " + dir.string());
}

int cmd_judge(const JudgeArgs& a) {
  sandbox::ToolchainMap toolchains = sandbox::default_toolchains();
  sandbox::ExecutionLimits base_limits;
  if (!a.config.empty()) {
    const config::AppConfig cfg = config::load_config(a.config);
    toolchains = cfg.toolchains;
    base_limits = cfg.pipeline.limits;
  }
  const corpus::BenchmarkManifest bench = corpus::load_benchmark(a.problems);

  std::vector<std::string> rows(bench.problems.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= bench.problems.size()) {
        return;
      }
      const corpus::Problem& p = bench.problems[i];
      try {
        const fs::path source_path = find_submission(a.submissions, p.id);
        std::ifstream in(source_path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        sandbox::ExecutionLimits limits = base_limits;
        limits.time_limit_s = p.time_limit_s;
        limits.memory_limit_mb = p.memory_limit_mb;
        const sandbox::ExecutionReport report =
            sandbox::judge_problem(buf.str(), p, limits, toolchains);
        const sandbox::Verdict verdict =
            sandbox::aggregate(report, sandbox::JudgeScope::All);
        rows[i] = p.id + "\t" + std::string(sandbox::to_string(verdict));
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) {
          first_error = std::current_exception();
        }
        next.store(bench.problems.size());
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, a.jobs); ++t) {
    pool.emplace_back(worker);
  }
  for (std::thread& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
  for (const std::string& row : rows) {
    std::cout << row << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- curate

struct DistillArgs {
  std::string roles = "retrieval,debugging";
  std::string strong_run;
  std::string mixed_run;
  std::string out;
  std::string source_model;  // overrides the run's own config
};

std::vector<AgentRole> parse_roles(const std::string& csv) {
  std::vector<AgentRole> roles;
  std::string::size_type start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const std::string name = csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!name.empty()) {
      const auto role = role_from_string(name);
      if (!role || *role == AgentRole::Supervisor) {
        throw ConfigError("'" + name + "' is not a distillable role");
      }
      roles.push_back(*role);
    }
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  if (roles.empty()) {
    throw ConfigError("--roles is empty");
  }
  return roles;
}

// The run directory is self-describing: its manifest embeds the config,
// which names the model serving each role.
std::string model_for_run(const fs::path& run_dir, AgentRole role) {
  const runstore::RunManifest manifest = runstore::load_manifest(run_dir);
  if (manifest.config_snapshot.empty()) {
    return {};
  }
  const config::AppConfig cfg = config::parse_config(manifest.config_snapshot);
  const auto it = cfg.backends.find(role);
  return it == cfg.backends.end() ? std::string{} : it->second.model;
}

int cmd_distill(const DistillArgs& a) {
  const std::vector<AgentRole> roles = parse_roles(a.roles);
  fs::create_directories(a.out);

  std::optional<std::vector<pipeline::Trajectory>> strong;
  std::optional<std::vector<pipeline::Trajectory>> mixed;

  for (AgentRole role : roles) {
    const bool debugging = role == AgentRole::Debugging;
    const std::string& run_dir = debugging ? a.mixed_run : a.strong_run;
    if (run_dir.empty()) {
      throw ConfigError(std::string("role '") + std::string(to_string(role)) +
                        "' needs " + (debugging ? "--mixed-run" : "--strong-run"));
    }
    auto& cache = debugging ? mixed : strong;
    if (!cache) {
      cache = runstore::load_run_trajectories(run_dir);
    }
    std::string model = a.source_model;
    if (model.empty()) {
      model = model_for_run(run_dir, role);
    }
    const std::vector<curation::TrainingExample> examples =
        curation::distill_role(*cache, role, model);
    const fs::path corpus_path =
        fs::path(a.out) / (std::string(to_string(role)) + ".jsonl");
    emitter::write_corpus(examples, role, corpus_path);
    std::cout << to_string(role) << "\t" << examples.size() << "\t"
              << corpus_path.string() << "\n";
  }
  return 0;
}

struct SuperviseArgs {
  std::string small_run;
  std::string strong_run;
  std::string config;
  std::string out;
  GatewayOptions gw;
  std::string prompts_dir;
};

std::map<std::string, sandbox::Verdict> verdict_map(
    const std::vector<pipeline::Trajectory>& trajs) {
  std::map<std::string, sandbox::Verdict> out;
  for (const pipeline::Trajectory& t : trajs) {
    out[t.problem_id] =
        t.hidden_verdict.value_or(sandbox::Verdict::RuntimeError);
  }
  return out;
}

int cmd_supervise(const SuperviseArgs& a) {
  const config::AppConfig cfg = config::load_config(a.config);

  std::vector<AgentRole> roles = pipeline_roles();
  roles.push_back(AgentRole::Supervisor);
  llm::Gateway gateway;
  wire_backends(gateway, cfg, roles, a.gw);

  const pipeline::Pipeline pipe(gateway, make_builder(a.prompts_dir),
                                cfg.pipeline, cfg.toolchains);
  const curation::Curator curator(pipe, cfg.curation);

  const corpus::BenchmarkManifest bench =
      runstore::load_run_problems(a.small_run);
  const std::vector<pipeline::Trajectory> small_trajs =
      runstore::load_run_trajectories(a.small_run);
  const std::vector<pipeline::Trajectory> strong_trajs =
      runstore::load_run_trajectories(a.strong_run);

  const std::vector<std::string> candidates =
      curation::select_supervision_candidates(verdict_map(strong_trajs),
                                              verdict_map(small_trajs));

  fs::create_directories(a.out);
  std::ofstream audit(fs::path(a.out) / "supervision_audit.jsonl",
                      std::ios::binary | std::ios::app);
  if (!audit) {
    throw IoError("cannot open the supervision audit log");
  }

  std::map<AgentRole, std::vector<curation::TrainingExample>> by_role;
  for (const std::string& id : candidates) {
    const pipeline::Trajectory* traj = nullptr;
    for (const pipeline::Trajectory& t : small_trajs) {
      if (t.problem_id == id) {
        traj = &t;
      }
    }
    const corpus::Problem* problem = nullptr;
    for (const corpus::Problem& p : bench.problems) {
      if (p.id == id) {
        problem = &p;
      }
    }
    if (!traj || !problem) {
      throw CoverageMismatchError("candidate '" + id +
                                  "' missing from the small run");
    }
    const curation::CurationRecord record = curator.supervise(*traj, *problem);
    audit << nlohmann::json(record).dump() << "\n";
    for (const curation::TrainingExample& ex : record.examples) {
      by_role[ex.role].push_back(ex);
    }
    std::cerr << id << ": "
              << (record.examples.empty() ? "no example" : "corrected")
              << " after " << record.iterations << " round(s)\n";
  }

  for (const auto& [role, examples] : by_role) {
    const fs::path corpus_path =
        fs::path(a.out) / (std::string(to_string(role)) + ".jsonl");
    emitter::write_corpus(examples, role, corpus_path);
    std::cout << to_string(role) << "\t" << examples.size() << "\t"
              << corpus_path.string() << "\n";
  }
  return 0;
}

// --------------------------------------------------------------- emitter

struct EmitArgs {
  std::string role;
  std::string corpus;
  std::string out;
  std::string base_model;
  int rank = 0;
  std::string projections;
  double lr = 0.0;
  int grad_accum = 0;
  int epochs = 0;
  bool tuned = false;
};

int cmd_emit_manifest(const EmitArgs& a) {
  const auto role = role_from_string(a.role);
  if (!role) {
    throw ConfigError("unknown role '" + a.role + "'");
  }
  emitter::ManifestOverrides overrides;
  if (!a.base_model.empty()) {
    overrides.base_model = a.base_model;
  }
  if (a.rank > 0) {
    overrides.adapter_rank = a.rank;
  }
  if (!a.projections.empty()) {
    std::vector<emitter::Projection> projections;
    std::string::size_type start = 0;
    while (start <= a.projections.size()) {
      const auto comma = a.projections.find(',', start);
      const std::string name = a.projections.substr(
          start,
          comma == std::string::npos ? std::string::npos : comma - start);
      if (!name.empty()) {
        const auto p = emitter::projection_from_string(name);
        if (!p) {
          throw ConfigError("unknown projection '" + name + "'");
        }
        projections.push_back(*p);
      }
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    overrides.target_projections = std::move(projections);
  }
  if (a.lr > 0.0) {
    overrides.learning_rate = a.lr;
  }
  if (a.grad_accum > 0) {
    overrides.gradient_accumulation = a.grad_accum;
  }
  if (a.epochs > 0) {
    overrides.epochs = a.epochs;
  }
  if (a.tuned) {
    overrides.tuned = true;
  }

  const emitter::AdapterManifest manifest =
      emitter::make_manifest(*role, a.corpus, overrides);
  const std::string out =
      a.out.empty() ? a.corpus + ".manifest.json" : a.out;
  emitter::write_manifest(manifest, out);
  std::cout << out << "\n";
  return 0;
}

int cmd_verify_manifest(const std::string& path) {
  std::string reason;
  if (emitter::verify_manifest(path, &reason)) {
    std::cout << "ok\n";
    return 0;
  }
  std::cerr << "mapforge: verify failed: " << reason << "\n";
  return 1;
}

// ---------------------------------------------------------------- report

int cmd_report(const std::string& run_dir, const std::string& format) {
  const runstore::RunManifest manifest = runstore::load_manifest(run_dir);
  const corpus::BenchmarkManifest bench = runstore::load_run_problems(run_dir);
  const std::vector<pipeline::Trajectory> trajs =
      runstore::load_run_trajectories(run_dir);

  metrics::RunReport report = metrics::score_run(trajs, bench);
  report.config_snapshot = manifest.config_snapshot;
  std::cout << metrics::render_report(report,
                                      format == "json"
                                          ? metrics::ReportFormat::Json
                                          : metrics::ReportFormat::Table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MapCoder-Lite pipeline, judge, and curation tool"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ImportArgs import_args;
  CLI::App* import_cmd =
      app.add_subcommand("import", "Convert a benchmark export to the "
                                   "canonical problem format");
  import_cmd->add_option("adapter", import_args.adapter, "Source adapter")
      ->required();
  import_cmd->add_option("src", import_args.src, "Source file or directory")
      ->required();
  import_cmd->add_option("-o,--out", import_args.out, "Canonical output file")
      ->required();
  import_cmd->add_option("--language", import_args.language,
                         "Fallback language for records without one");

  RunArgs run_args;
  CLI::App* run_cmd =
      app.add_subcommand("run", "Run the pipeline over a benchmark");
  run_cmd->add_option("problems", run_args.problems, "Canonical problem file")
      ->required();
  run_cmd->add_option("--config", run_args.config, "Config file")->required();
  run_cmd->add_option("--out", run_args.out, "Run directory (must not exist)")
      ->required();
  run_cmd->add_option("--mode", run_args.gw.mode,
                      "Backend mode: replay, record, or live");
  run_cmd->add_option("--cassette", run_args.gw.cassette, "Cassette file");
  run_cmd->add_option("--prompts", run_args.prompts_dir,
                      "Prompt template directory");
  run_cmd->add_option("--jobs", run_args.jobs, "Concurrent problems");
  run_cmd->add_option("--llm-jobs", run_args.gw.llm_jobs,
                      "Concurrent in-flight completions");

  RunArgs record_args;
  record_args.gw.mode = "record";
  CLI::App* record_cmd = app.add_subcommand(
      "record", "Run live and capture every exchange to a cassette");
  record_cmd->add_option("problems", record_args.problems,
                         "Canonical problem file")
      ->required();
  record_cmd->add_option("--config", record_args.config, "Config file")
      ->required();
  record_cmd
      ->add_option("--out", record_args.out, "Run directory (must not exist)")
      ->required();
  record_cmd->add_option("--cassette", record_args.gw.cassette,
                         "Cassette file to append to")
      ->required();
  record_cmd->add_option("--prompts", record_args.prompts_dir,
                         "Prompt template directory");
  record_cmd->add_option("--jobs", record_args.jobs, "Concurrent problems");
  record_cmd->add_option("--llm-jobs", record_args.gw.llm_jobs,
                         "Concurrent in-flight completions");

  JudgeArgs judge_args;
  CLI::App* judge_cmd =
      app.add_subcommand("judge", "Score a directory of submissions");
  judge_cmd->add_option("problems", judge_args.problems,
                        "Canonical problem file")
      ->required();
  judge_cmd->add_option("submissions", judge_args.submissions,
                        "Directory of <problem-id>.<ext> sources")
      ->required();
  judge_cmd->add_option("--config", judge_args.config,
                        "Config file (for toolchains)");
  judge_cmd->add_option("--jobs", judge_args.jobs, "Concurrent judgings");

  CLI::App* curate_cmd =
      app.add_subcommand("curate", "Build fine-tuning corpora");
  curate_cmd->require_subcommand(1);

  DistillArgs distill_args;
  CLI::App* distill_cmd = curate_cmd->add_subcommand(
      "distill", "Pass-filtered trajectory distillation");
  distill_cmd->add_option("--roles", distill_args.roles,
                          "Comma-separated roles to distill");
  distill_cmd->add_option("--strong-run", distill_args.strong_run,
                          "Run directory with strong-model trajectories");
  distill_cmd->add_option("--mixed-run", distill_args.mixed_run,
                          "Run directory with strong-debugger trajectories");
  distill_cmd->add_option("-o,--out", distill_args.out, "Corpus directory")
      ->required();
  distill_cmd->add_option("--source-model", distill_args.source_model,
                          "Override the model id stamped on examples");

  SuperviseArgs supervise_args;
  CLI::App* supervise_cmd = curate_cmd->add_subcommand(
      "supervise", "Supervisor-guided correction of failed trajectories");
  supervise_cmd->add_option("--small-run", supervise_args.small_run,
                            "Small-model run directory")
      ->required();
  supervise_cmd->add_option("--strong-run", supervise_args.strong_run,
                            "Strong-model run directory")
      ->required();
  supervise_cmd->add_option("--config", supervise_args.config, "Config file")
      ->required();
  supervise_cmd->add_option("-o,--out", supervise_args.out, "Corpus directory")
      ->required();
  supervise_cmd->add_option("--mode", supervise_args.gw.mode,
                            "Backend mode: replay, record, or live");
  supervise_cmd->add_option("--cassette", supervise_args.gw.cassette,
                            "Cassette file");
  supervise_cmd->add_option("--prompts", supervise_args.prompts_dir,
                            "Prompt template directory");
  supervise_cmd->add_option("--llm-jobs", supervise_args.gw.llm_jobs,
                            "Concurrent in-flight completions");

  EmitArgs emit_args;
  CLI::App* emit_cmd = app.add_subcommand(
      "emit-manifest", "Write the adapter training manifest for a corpus");
  emit_cmd->add_option("--role", emit_args.role, "Agent role")->required();
  emit_cmd->add_option("--corpus", emit_args.corpus, "Corpus file")
      ->required();
  emit_cmd->add_option("-o,--out", emit_args.out,
                       "Manifest path (default: <corpus>.manifest.json)");
  emit_cmd->add_option("--base-model", emit_args.base_model, "Base model id");
  emit_cmd->add_option("--rank", emit_args.rank, "Adapter rank");
  emit_cmd->add_option("--projections", emit_args.projections,
                       "Comma-separated projection targets");
  emit_cmd->add_option("--lr", emit_args.lr, "Learning rate");
  emit_cmd->add_option("--grad-accum", emit_args.grad_accum,
                       "Gradient accumulation steps");
  emit_cmd->add_option("--epochs", emit_args.epochs, "Training epochs");
  emit_cmd->add_flag("--tuned", emit_args.tuned,
                     "Mark the hyperparameters as per-role tuned");

  std::string verify_path;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify-manifest", "Check a manifest against its corpus file");
  verify_cmd->add_option("manifest", verify_path, "Manifest file")->required();

  std::string report_dir;
  std::string report_format = "table";
  CLI::App* report_cmd =
      app.add_subcommand("report", "Score a run directory");
  report_cmd->add_option("run_dir", report_dir, "Run directory")->required();
  report_cmd->add_option("--format", report_format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*import_cmd) {
      return cmd_import(import_args);
    }
    if (*run_cmd) {
      return cmd_run(run_args);
    }
    if (*record_cmd) {
      return cmd_run(record_args);
    }
    if (*judge_cmd) {
      return cmd_judge(judge_args);
    }
    if (*distill_cmd) {
      return cmd_distill(distill_args);
    }
    if (*supervise_cmd) {
      return cmd_supervise(supervise_args);
    }
    if (*emit_cmd) {
      return cmd_emit_manifest(emit_args);
    }
    if (*verify_cmd) {
      return cmd_verify_manifest(verify_path);
    }
    if (*report_cmd) {
      return cmd_report(report_dir, report_format);
    }
  } catch (const std::exception& e) {
    std::cerr << "mapforge: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
