#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pemq {

/// Command template run through /bin/sh. `{mesh}` and `{outdir}` are replaced
/// by shell-quoted absolute paths.
struct SolverSpec {
  std::string command;
  std::filesystem::path working_dir;  // empty: current directory
  double timeout_s = 600.0;
};

/// Throws ValidationError unless both placeholders are present and the
/// timeout is positive.
void validate(const SolverSpec& spec);

enum class RunStatus { success, failed, timeout, protocol_error };

std::string_view to_string(RunStatus s);
RunStatus parse_run_status(std::string_view s);

struct SolverRun {
  std::filesystem::path mesh;
  std::size_t vertex_count = 0;
  RunStatus status = RunStatus::failed;
  std::vector<double> solution;
  std::optional<std::vector<double>> ground_truth;
  std::map<std::string, double> performances;
  double duration_s = 0.0;
  int exit_code = 0;
  std::string stderr_text;
  std::string message;  // why a run did not succeed
};

/// `<stem>` of a mesh path: file name without directory and final extension.
std::string mesh_stem(const std::filesystem::path& mesh);

/// Spawns the solver and reads `<stem>-solution.txt` (required),
/// `<stem>-ground-truth.txt` (optional) and every other `<stem>-<name>.txt`
/// as the performance `<name>`. Never throws for solver misbehaviour; the
/// returned status says what happened. Throws for an unreadable mesh or an
/// outdir that cannot be created.
SolverRun run_solver(const SolverSpec& spec, const std::filesystem::path& mesh, const std::filesystem::path& outdir);

/// One run per mesh, in order, each in its own `outdir/<stem>` folder.
/// Throws ValidationError for an empty list.
std::vector<SolverRun> run_dataset(const SolverSpec& spec, const std::vector<std::filesystem::path>& meshes,
                                   const std::filesystem::path& outdir, int jobs = 1);

// Protocol text helpers shared with the built-in solver.

/// One value per line, 17 significant digits, LF.
void write_field(const std::filesystem::path& path, const std::vector<double>& values);
void write_scalar(const std::filesystem::path& path, double value);
/// Throws ProtocolError naming the file and line.
std::vector<double> read_field(const std::filesystem::path& path);
/// First non-blank line; trailing content is ignored with a warning.
double read_scalar(const std::filesystem::path& path);

}  // namespace pemq
