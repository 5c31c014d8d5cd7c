#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pemq/harness.hpp"
#include "pemq/io.hpp"
#include "pemq/meshgen.hpp"
#include "pemq/metrics.hpp"

namespace pemq {

using Json = nlohmann::json;

std::string_view tool_version();

// GenerationConfig <-> JSON. The reader throws ValidationError naming the
// offending field and validates the result.
Json to_json(const GenerationConfig& c);
GenerationConfig config_from_json(const Json& j);

/// Contents of `manifest.json` in a dataset directory.
struct Manifest {
  GenerationConfig config;
  std::vector<double> t_values;
  std::vector<std::string> meshes;  // file names relative to the directory
  MeshFileFormat format = MeshFileFormat::off;
  std::string tool_version;
};

Json to_json(const Manifest& m);
Manifest manifest_from_json(const Json& j);

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kRunsFile = "runs.json";

/// `mesh-000`, `mesh-001`, ... (at least three digits).
std::string mesh_file_stem(std::size_t index, std::size_t count);

/// Writes every mesh and then the manifest (written last, so a directory with
/// a manifest is complete). STL is refused for non-triangle meshes.
Manifest write_dataset(const Dataset& d, const std::filesystem::path& dir, MeshFileFormat format);

/// Throws ValidationError when the manifest is missing or malformed.
Manifest read_manifest(const std::filesystem::path& dir);
std::filesystem::path mesh_path(const std::filesystem::path& dir, const Manifest& m, std::size_t index);
PolygonalMesh read_dataset_mesh(const std::filesystem::path& dir, const Manifest& m, std::size_t index);
std::vector<PolygonalMesh> read_dataset_meshes(const std::filesystem::path& dir, const Manifest& m);

/// Per-mesh summaries, one CSV of element metrics per mesh, the summary CSV
/// and min/max line plots per metric under `out`.
std::vector<MeshMetricsSummary> write_analysis(const std::vector<PolygonalMesh>& meshes,
                                               const std::filesystem::path& out);

/// Run records without timing, so identical sweeps give identical files.
/// Vertex fields stay in the solver's own files under `<dir>/<stem>/`.
Json to_json(const SolverRun& r);
void write_runs(const std::filesystem::path& dir, const std::string& solver, const std::vector<SolverRun>& runs);

/// Reads `runs.json`; `with_fields` also loads solution and ground truth.
std::vector<SolverRun> read_runs(const std::filesystem::path& dir, bool with_fields = false);

/// The built-in VEM executable: $PEMQ_VEM if set, else `pemq-vem` next to the
/// running executable, else `pemq-vem` from PATH.
std::filesystem::path builtin_solver_path();
SolverSpec builtin_solver_spec(double timeout_s = 600.0);

}  // namespace pemq
