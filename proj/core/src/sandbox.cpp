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

#include "mapforge/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "mapforge/corpus.hpp"
#include "mapforge/errors.hpp"

namespace mapforge::sandbox {

namespace fs = std::filesystem;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Accepted:
      return "accepted";
    case Verdict::WrongAnswer:
      return "wrong_answer";
    case Verdict::RuntimeError:
      return "runtime_error";
    case Verdict::CompileError:
      return "compile_error";
    case Verdict::TimeLimit:
      return "time_limit";
    case Verdict::MemoryLimit:
      return "memory_limit";
    case Verdict::OutputLimit:
      return "output_limit";
  }
  return "unknown";
}

std::optional<Verdict> verdict_from_string(std::string_view name) {
  if (name == "accepted") return Verdict::Accepted;
  if (name == "wrong_answer") return Verdict::WrongAnswer;
  if (name == "runtime_error") return Verdict::RuntimeError;
  if (name == "compile_error") return Verdict::CompileError;
  if (name == "time_limit") return Verdict::TimeLimit;
  if (name == "memory_limit") return Verdict::MemoryLimit;
  if (name == "output_limit") return Verdict::OutputLimit;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const ExecutionLimits& l) {
  j = nlohmann::json{{"time_limit_s", l.time_limit_s},
                     {"memory_limit_mb", l.memory_limit_mb},
                     {"output_limit_kb", l.output_limit_kb}};
}

void from_json(const nlohmann::json& j, ExecutionLimits& l) {
  l.time_limit_s = j.value("time_limit_s", 5.0);
  l.memory_limit_mb = j.value("memory_limit_mb", std::int64_t{512});
  l.output_limit_kb = j.value("output_limit_kb", std::int64_t{64});
}

ToolchainMap default_toolchains() {
  ToolchainMap map;
  map["python"] = Toolchain{"", "python3 {src}", ".py"};
  map["cpp"] = Toolchain{"g++ -O2 -std=c++17 -o {bin} {src}", "{bin}", ".cpp"};
  return map;
}

std::string normalize_output(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::string line;
  auto flush_line = [&] {
    while (!line.empty() &&
           (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
      line.pop_back();
    }
    out += line;
    out.push_back('\n');
    line.clear();
  };
  for (char c : text) {
    if (c == '\n') {
      flush_line();
    } else {
      line.push_back(c);
    }
  }
  if (!line.empty()) {
    flush_line();
  }
  // Drop trailing blank lines, including the final newline.
  while (!out.empty() && out.back() == '\n') {
    out.pop_back();
    if (!out.empty() && out.back() != '\n') {
      break;
    }
  }
  return out;
}

bool compare_output(std::string_view actual, std::string_view expected) {
  return normalize_output(actual) == normalize_output(expected);
}

namespace {

// A temp directory removed on destruction. Each run_tests invocation owns
// one, so concurrent judgings never share state.
class ScopedTempDir {
 public:
  ScopedTempDir() {
    std::string tmpl =
        (fs::temp_directory_path() / "mapforge-run-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw IoError("mkdtemp failed: " + std::string(std::strerror(errno)));
    }
    path_ = tmpl;
  }
  ~ScopedTempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScopedTempDir(const ScopedTempDir&) = delete;
  ScopedTempDir& operator=(const ScopedTempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct RawRun {
  enum class Status { Exited, Signaled, TimedOut, OutputCapped, SpawnFailed };
  Status status = Status::SpawnFailed;
  int exit_code = -1;
  int term_signal = 0;
  std::string stdout_text;
  std::string stderr_text;
  std::chrono::milliseconds elapsed{0};
  long max_rss_kb = 0;
};

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

void set_nonblocking(int fd) {
  int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

// Reads whatever is available; appends capped at `cap` bytes. Returns false
// once the total would exceed the cap.
bool drain_fd(int fd, std::string& sink, std::size_t cap, bool& eof) {
  std::array<char, 8192> buf;
  for (;;) {
    ssize_t n = ::read(fd, buf.data(), buf.size());
    if (n > 0) {
      std::size_t keep = buf.size();
      if (sink.size() + static_cast<std::size_t>(n) > cap) {
        keep = cap - std::min(cap, sink.size());
        sink.append(buf.data(), keep);
        return false;
      }
      sink.append(buf.data(), static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) {
      eof = true;
      return true;
    }
    if (errno == EAGAIN || errno == EWOULDBLOCK) {
      return true;
    }
    if (errno == EINTR) {
      continue;
    }
    eof = true;  // read error: treat as closed
    return true;
  }
}

// Runs `command` through sh -c in `cwd` with stdin redirected from
// `stdin_file`, a scrubbed environment, and RLIMIT_AS / RLIMIT_CPU set.
// The wall-clock watchdog SIGKILLs the process group at the limit.
RawRun execute_command(const std::string& command, const fs::path& cwd,
                       const fs::path& stdin_file, double time_limit_s,
                       std::int64_t memory_limit_mb,
                       std::size_t output_cap_bytes) {
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
    throw IoError("pipe failed: " + std::string(std::strerror(errno)));
  }

  // Everything the child touches is prepared before fork; only
  // async-signal-safe calls happen between fork and exec.
  const std::string cwd_str = cwd.string();
  const std::string stdin_str = stdin_file.string();
  const std::string home_env = "HOME=" + cwd_str;
  const std::string tmp_env = "TMPDIR=" + cwd_str;
  const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
  const char* envp[] = {
      "PATH=/usr/local/sbin:/usr/local/bin:/usr/sbin:/usr/bin:/sbin:/bin",
      home_env.c_str(), tmp_env.c_str(), "LC_ALL=C.UTF-8", nullptr};
  const rlim_t as_bytes =
      static_cast<rlim_t>(memory_limit_mb) * 1024 * 1024;
  const rlim_t cpu_seconds =
      static_cast<rlim_t>(std::ceil(time_limit_s)) + 1;

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    throw IoError("fork failed: " + std::string(std::strerror(errno)));
  }

  if (pid == 0) {
    ::setpgid(0, 0);
    int in_fd = ::open(stdin_str.c_str(), O_RDONLY);
    if (in_fd < 0) {
      ::_exit(126);
    }
    if (::dup2(in_fd, STDIN_FILENO) < 0 ||
        ::dup2(out_pipe[1], STDOUT_FILENO) < 0 ||
        ::dup2(err_pipe[1], STDERR_FILENO) < 0) {
      ::_exit(126);
    }
    ::close(in_fd);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    if (::chdir(cwd_str.c_str()) != 0) {
      ::_exit(126);
    }
    rlimit as_lim{as_bytes, as_bytes};
    ::setrlimit(RLIMIT_AS, &as_lim);
    rlimit cpu_lim{cpu_seconds, cpu_seconds + 1};
    ::setrlimit(RLIMIT_CPU, &cpu_lim);
    rlimit core_lim{0, 0};
    ::setrlimit(RLIMIT_CORE, &core_lim);
    // Best-effort network isolation; needs privileges we may not have.
    ::unshare(CLONE_NEWNET);
    ::execve("/bin/sh", const_cast<char* const*>(argv),
             const_cast<char* const*>(envp));
    ::_exit(127);
  }

  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  set_nonblocking(out_pipe[0]);
  set_nonblocking(err_pipe[0]);

  RawRun run;
  const auto start = std::chrono::steady_clock::now();
  const auto deadline =
      start + std::chrono::milliseconds(
                  static_cast<std::int64_t>(time_limit_s * 1000.0));
  // Reaping may lag the SIGKILL; give it a bounded grace window.
  const auto grace = std::chrono::milliseconds(500);

  bool out_eof = false;
  bool err_eof = false;
  bool killed_for_time = false;
  bool killed_for_output = false;
  bool reaped = false;
  int wait_status = 0;
  rusage usage{};

  auto kill_group = [&] { ::kill(-pid, SIGKILL); };

  for (;;) {
    pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    ::poll(fds, 2, 5);

    if (!out_eof &&
        !drain_fd(out_pipe[0], run.stdout_text, output_cap_bytes, out_eof) &&
        !killed_for_output) {
      killed_for_output = true;
      run.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      kill_group();
    }
    if (!err_eof &&
        !drain_fd(err_pipe[0], run.stderr_text, output_cap_bytes, err_eof)) {
      // stderr spam is capped but not a verdict by itself
      err_eof = true;
    }

    if (!reaped) {
      int r = ::wait4(pid, &wait_status, WNOHANG, &usage);
      if (r == pid) {
        reaped = true;
        if (!killed_for_time && !killed_for_output) {
          run.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
              std::chrono::steady_clock::now() - start);
        }
        kill_group();  // sweep any grandchildren holding the pipes
      }
    }

    if (reaped && out_eof && err_eof) {
      break;
    }
    if (reaped) {
      // Child is gone; writers should close promptly after the sweep.
      static constexpr auto kDrainBudget = std::chrono::milliseconds(500);
      if (std::chrono::steady_clock::now() - start >
          deadline - start + grace + kDrainBudget) {
        break;
      }
    }

    const auto now = std::chrono::steady_clock::now();
    if (!reaped && !killed_for_time && !killed_for_output && now >= deadline) {
      killed_for_time = true;
      run.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          now - start);
      kill_group();
    }
    if (!reaped && (killed_for_time || killed_for_output) &&
        now >= deadline + grace * 4) {
      // Unreapable child (should not happen after SIGKILL); bail out.
      break;
    }
  }

  ::close(out_pipe[0]);
  ::close(err_pipe[0]);
  if (!reaped) {
    ::wait4(pid, &wait_status, WNOHANG, &usage);
  }

  run.max_rss_kb = usage.ru_maxrss;
  if (killed_for_output) {
    run.status = RawRun::Status::OutputCapped;
  } else if (killed_for_time) {
    run.status = RawRun::Status::TimedOut;
  } else if (WIFEXITED(wait_status)) {
    run.status = RawRun::Status::Exited;
    run.exit_code = WEXITSTATUS(wait_status);
  } else if (WIFSIGNALED(wait_status)) {
    run.status = RawRun::Status::Signaled;
    run.term_signal = WTERMSIG(wait_status);
  }
  return run;
}

std::string render_template(std::string_view tmpl, std::string_view src,
                            std::string_view bin) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 5, "{src}") == 0) {
      out += src;
      i += 5;
    } else if (tmpl.compare(i, 5, "{bin}") == 0) {
      out += bin;
      i += 5;
    } else {
      out.push_back(tmpl[i]);
      ++i;
    }
  }
  return out;
}

// Peak RSS at or above this fraction of the limit turns an abnormal exit
// into MemoryLimit. Address-space accounting cannot be exact without
// cgroups; this is the documented heuristic.
constexpr double kMemoryVerdictFraction = 0.8;

Verdict classify_failure(const RawRun& run, std::int64_t memory_limit_mb) {
  const double rss_fraction =
      static_cast<double>(run.max_rss_kb) /
      (static_cast<double>(memory_limit_mb) * 1024.0);
  if (rss_fraction >= kMemoryVerdictFraction) {
    return Verdict::MemoryLimit;
  }
  return Verdict::RuntimeError;
}

}  // namespace

ExecutionReport run_tests(const std::string& source,
                          const std::string& language,
                          const std::vector<corpus::TestCase>& tests,
                          const ExecutionLimits& limits,
                          const ToolchainMap& toolchains) {
  const auto it = toolchains.find(language);
  if (it == toolchains.end()) {
    throw ToolchainMissingError("no toolchain configured for language '" +
                                language + "'");
  }
  if (tests.empty()) {
    throw EmptyScopeError("run_tests invoked with zero tests");
  }
  const Toolchain& tc = it->second;

  ScopedTempDir dir;
  const std::string src_name = "main" + tc.file_ext;
  const std::string bin_name = "./prog";
  write_file(dir.path() / src_name, source);

  ExecutionReport report;
  const std::size_t output_cap =
      static_cast<std::size_t>(limits.output_limit_kb) * 1024;

  if (!tc.compile_cmd.empty()) {
    const std::string cmd = render_template(tc.compile_cmd, src_name, bin_name);
    write_file(dir.path() / ".stdin", "");
    RawRun compile = execute_command(
        cmd, dir.path(), dir.path() / ".stdin", /*time_limit_s=*/60.0,
        /*memory_limit_mb=*/std::max<std::int64_t>(2048, limits.memory_limit_mb),
        /*output_cap_bytes=*/128 * 1024);
    if (compile.status != RawRun::Status::Exited || compile.exit_code != 0) {
      report.compiled = false;
      report.overall = Verdict::CompileError;
      report.compile_log = compile.stderr_text;
      return report;
    }
  }
  report.compiled = true;

  const std::string run_cmd = render_template(tc.run_cmd, src_name, bin_name);
  bool all_accepted = true;
  Verdict first_failure = Verdict::Accepted;

  for (const corpus::TestCase& test : tests) {
    const fs::path stdin_file = dir.path() / ".stdin";
    write_file(stdin_file, test.input);
    RawRun run = execute_command(run_cmd, dir.path(), stdin_file,
                                 limits.time_limit_s, limits.memory_limit_mb,
                                 output_cap);
    TestResult result;
    result.elapsed = run.elapsed;
    result.stdout_text = run.stdout_text;
    result.stderr_text = run.stderr_text;
    switch (run.status) {
      case RawRun::Status::TimedOut:
        result.verdict = Verdict::TimeLimit;
        break;
      case RawRun::Status::OutputCapped:
        result.verdict = Verdict::OutputLimit;
        break;
      case RawRun::Status::Signaled:
        result.verdict = classify_failure(run, limits.memory_limit_mb);
        break;
      case RawRun::Status::Exited:
        if (run.exit_code != 0) {
          result.verdict = classify_failure(run, limits.memory_limit_mb);
        } else if (compare_output(run.stdout_text, test.expected_output)) {
          result.verdict = Verdict::Accepted;
        } else {
          result.verdict = Verdict::WrongAnswer;
        }
        break;
      case RawRun::Status::SpawnFailed:
        result.verdict = Verdict::RuntimeError;
        break;
    }
    if (result.verdict != Verdict::Accepted && all_accepted) {
      all_accepted = false;
      first_failure = result.verdict;
    }
    report.per_test.push_back(std::move(result));
  }

  report.overall = all_accepted ? Verdict::Accepted : first_failure;
  return report;
}

ExecutionReport judge_problem(const std::string& source,
                              const corpus::Problem& problem,
                              const ExecutionLimits& limits,
                              const ToolchainMap& toolchains) {
  std::vector<corpus::TestCase> all = problem.sample_tests;
  all.insert(all.end(), problem.hidden_tests.begin(),
             problem.hidden_tests.end());
  ExecutionReport report =
      run_tests(source, problem.language, all, limits, toolchains);
  for (std::size_t i = 0; i < report.per_test.size(); ++i) {
    report.per_test[i].scope = i < problem.sample_tests.size()
                                   ? TestScope::Sample
                                   : TestScope::Hidden;
  }
  return report;
}

Verdict aggregate(const ExecutionReport& report, JudgeScope scope) {
  if (!report.compiled) {
    return Verdict::CompileError;
  }
  bool any = false;
  for (const TestResult& r : report.per_test) {
    const bool in_scope =
        scope == JudgeScope::All ||
        (scope == JudgeScope::SampleOnly && r.scope == TestScope::Sample) ||
        (scope == JudgeScope::HiddenOnly && r.scope == TestScope::Hidden);
    if (!in_scope) {
      continue;
    }
    any = true;
    if (r.verdict != Verdict::Accepted) {
      return r.verdict;
    }
  }
  if (!any) {
    throw EmptyScopeError("no tests in the selected scope");
  }
  return Verdict::Accepted;
}

}  // namespace mapforge::sandbox
