#include "pemq/harness.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "pemq/error.hpp"
#include "pemq/io.hpp"
#include "pemq/log.hpp"

namespace pemq {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxStderr = 64 * 1024;

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string substitute(std::string cmd, const std::string& key, const std::string& value) {
  for (std::size_t pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size())) {
    cmd.replace(pos, key.size(), value);
  }
  return cmd;
}

std::string slurp(const fs::path& p, std::size_t limit) {
  std::ifstream is(p, std::ios::binary);
  std::string s;
  if (!is) return s;
  s.resize(limit);
  is.read(s.data(), static_cast<std::streamsize>(limit));
  s.resize(static_cast<std::size_t>(is.gcount()));
  return s;
}

struct ProcessResult {
  bool timed_out = false;
  int exit_code = 0;  // 128 + signal for signalled children
};

ProcessResult run_process(const std::string& cmd, const fs::path& cwd, const fs::path& out_log, const fs::path& err_log,
                          double timeout_s) {
  const std::string cwd_s = cwd.string(), out_s = out_log.string(), err_s = err_log.string();
  const pid_t pid = fork();
  if (pid < 0) throw Error(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    setpgid(0, 0);
    if (!cwd_s.empty() && chdir(cwd_s.c_str()) != 0) _exit(126);
    const int in = open("/dev/null", O_RDONLY);
    const int out = open(out_s.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int err = open(err_s.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (in < 0 || out < 0 || err < 0) _exit(126);
    dup2(in, 0);
    dup2(out, 1);
    dup2(err, 2);
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  ProcessResult r;
  int status = 0;
  for (;;) {
    const pid_t w = waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) throw Error(std::string("waitpid failed: ") + std::strerror(errno));
    if (std::chrono::steady_clock::now() >= deadline) {
      r.timed_out = true;
      kill(-pid, SIGKILL);
      while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  // Reap anything the shell left running in its group.
  kill(-pid, SIGKILL);
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) r.exit_code = 128 + WTERMSIG(status);
  return r;
}

double parse_value(const std::string& text, const fs::path& file, std::size_t line, std::size_t* used) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || !std::isfinite(v)) {
    throw ProtocolError(fmt::format("{}: line {}: expected a finite number, got '{}'", file.filename().string(), line, text));
  }
  if (used) *used = static_cast<std::size_t>(end - begin);
  return v;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void validate(const SolverSpec& spec) {
  if (spec.command.find("{mesh}") == std::string::npos || spec.command.find("{outdir}") == std::string::npos) {
    throw ValidationError("solver command must contain both {mesh} and {outdir}");
  }
  if (!(spec.timeout_s > 0.0)) throw ValidationError("solver timeout must be positive");
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::success: return "success";
    case RunStatus::failed: return "failed";
    case RunStatus::timeout: return "timeout";
    case RunStatus::protocol_error: return "protocol_error";
  }
  return "?";
}

RunStatus parse_run_status(std::string_view s) {
  for (auto v : {RunStatus::success, RunStatus::failed, RunStatus::timeout, RunStatus::protocol_error}) {
    if (to_string(v) == s) return v;
  }
  throw ValidationError("unknown run status '" + std::string(s) + "'");
}

std::string mesh_stem(const fs::path& mesh) { return mesh.stem().string(); }

void write_field(const fs::path& path, const std::vector<double>& values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  for (double v : values) os << fmt::format("{:.17g}\n", v);
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

void write_scalar(const fs::path& path, double value) { write_field(path, {value}); }

std::vector<double> read_field(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ProtocolError("cannot read '" + path.filename().string() + "'");
  std::vector<double> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty()) continue;
    std::size_t used = 0;
    out.push_back(parse_value(t, path, n, &used));
    if (used != t.size()) {
      throw ProtocolError(fmt::format("{}: line {}: expected one value per line", path.filename().string(), n));
    }
  }
  return out;
}

double read_scalar(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ProtocolError("cannot read '" + path.filename().string() + "'");
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty()) continue;
    std::size_t used = 0;
    const double v = parse_value(t, path, n, &used);
    std::string rest;
    bool more = used != t.size();
    while (!more && std::getline(is, rest)) more = !trim(rest).empty();
    if (more) logger().warn("{}: ignoring content after the first value", path.filename().string());
    return v;
  }
  throw ProtocolError(path.filename().string() + ": no value");
}

SolverRun run_solver(const SolverSpec& spec, const fs::path& mesh, const fs::path& outdir) {
  validate(spec);
  SolverRun run;
  run.mesh = mesh;
  run.vertex_count = read_mesh(mesh).num_vertices();
  fs::create_directories(outdir);
  const auto abs_mesh = fs::absolute(mesh), abs_out = fs::absolute(outdir);
  const std::string stem = mesh_stem(mesh);
  const std::string prefix = stem + "-";

  // Stale outputs from an earlier run would be mistaken for fresh ones.
  for (const auto& e : fs::directory_iterator(abs_out)) {
    const auto name = e.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && e.path().extension() == ".txt") fs::remove(e.path());
  }

  std::string cmd = substitute(spec.command, "{mesh}", shell_quote(abs_mesh.string()));
  cmd = substitute(cmd, "{outdir}", shell_quote(abs_out.string()));
  const auto err_log = abs_out / (stem + ".stderr.log");
  const auto out_log = abs_out / (stem + ".stdout.log");
  logger().debug("running solver: {}", cmd);
  const auto t0 = std::chrono::steady_clock::now();
  const auto proc = run_process(cmd, spec.working_dir, out_log, err_log, spec.timeout_s);
  run.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.exit_code = proc.exit_code;
  run.stderr_text = slurp(err_log, kMaxStderr);

  if (proc.timed_out) {
    run.status = RunStatus::timeout;
    run.message = fmt::format("killed after {:g} s", spec.timeout_s);
    return run;
  }
  if (proc.exit_code != 0) {
    run.status = RunStatus::failed;
    run.message = fmt::format("solver exited with status {}", proc.exit_code);
    return run;
  }
  try {
    const auto sol_path = abs_out / (prefix + "solution.txt");
    if (!fs::exists(sol_path)) throw ProtocolError("missing " + sol_path.filename().string());
    run.solution = read_field(sol_path);
    if (run.solution.size() != run.vertex_count) {
      throw ProtocolError(fmt::format("{} has {} values but the mesh has {} vertices", sol_path.filename().string(),
                                      run.solution.size(), run.vertex_count));
    }
    const auto gt_path = abs_out / (prefix + "ground-truth.txt");
    if (fs::exists(gt_path)) {
      run.ground_truth = read_field(gt_path);
      if (run.ground_truth->size() != run.vertex_count) {
        throw ProtocolError(fmt::format("{} has {} values but the mesh has {} vertices", gt_path.filename().string(),
                                        run.ground_truth->size(), run.vertex_count));
      }
    }
    for (const auto& e : fs::directory_iterator(abs_out)) {
      const auto name = e.path().filename().string();
      if (name.rfind(prefix, 0) != 0 || e.path().extension() != ".txt") continue;
      const auto perf = name.substr(prefix.size(), name.size() - prefix.size() - 4);
      if (perf == "solution" || perf == "ground-truth" || perf.empty()) continue;
      run.performances[perf] = read_scalar(e.path());
    }
    run.status = RunStatus::success;
  } catch (const ProtocolError& e) {
    run.status = RunStatus::protocol_error;
    run.message = e.what();
    run.solution.clear();
    run.ground_truth.reset();
    run.performances.clear();
  }
  return run;
}

std::vector<SolverRun> run_dataset(const SolverSpec& spec, const std::vector<fs::path>& meshes, const fs::path& outdir,
                                   int jobs) {
  if (meshes.empty()) throw ValidationError("dataset is empty");
  validate(spec);
  std::vector<SolverRun> runs(meshes.size());
  auto one = [&](std::size_t i) {
    runs[i] = run_solver(spec, meshes[i], outdir / mesh_stem(meshes[i]));
    logger().info("mesh {}: {}", i, to_string(runs[i].status));
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < meshes.size(); ++i) one(i);
    return runs;
  }
  std::vector<std::exception_ptr> errors(meshes.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  for (int w = 0; w < std::min<int>(jobs, static_cast<int>(meshes.size())); ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < meshes.size(); i = next++) {
        try {
          one(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    }));
  }
  for (auto& w : workers) w.get();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return runs;
}

}  // namespace pemq
