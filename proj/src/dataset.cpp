#include "pemq/dataset.hpp"

#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "pemq/analysis.hpp"
#include "pemq/error.hpp"
#include "pemq/log.hpp"

namespace pemq {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  os << text;
  if (!os) throw Error("write failed for '" + p.string() + "'");
}

Json read_json(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw ValidationError("cannot read '" + p.string() + "'");
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw ValidationError(p.filename().string() + ": " + e.what());
  }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// Field access with messages that name the field.
const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + "." + key + " is missing");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + " must be a number");
  return j.get<double>();
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ValidationError(where + " must be a string");
  return j.get<std::string>();
}

bool boolean(const Json& j, const std::string& where) {
  if (!j.is_boolean()) throw ValidationError(where + " must be true or false");
  return j.get<bool>();
}

std::optional<double> optional_field(const Json& j, const std::string& key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return number(*it, where + "." + key);
}

Placement placement_from_json(const Json& j, const std::string& where) {
  Placement p;
  p.id = text(field(j, "id", where), where + ".id");
  try {
    p.source = PolygonSource::parse(text(field(j, "source", where), where + ".source"));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ".source: " + e.what());
  }
  p.param = optional_field(j, "param", where);
  const auto& pos = field(j, "position", where);
  if (!pos.is_array() || pos.size() != 2) throw ValidationError(where + ".position must be [x, y]");
  p.position = {number(pos[0], where + ".position[0]"), number(pos[1], where + ".position[1]")};
  if (j.contains("scale")) p.scale = number(j["scale"], where + ".scale");
  if (j.contains("rotation_deg")) p.rotation_deg = number(j["rotation_deg"], where + ".rotation_deg");
  try {
    validate(p);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return p;
}

}  // namespace

std::string_view tool_version() { return PEMQ_VERSION; }

Json to_json(const GenerationConfig& c) {
  Json placements = Json::array();
  for (const auto& p : c.placements) {
    placements.push_back({{"id", p.id},
                          {"source", p.source.to_string()},
                          {"param", optional_number(p.param)},
                          {"position", {p.position.x, p.position.y}},
                          {"scale", p.scale},
                          {"rotation_deg", p.rotation_deg}});
  }
  return {{"placements", placements},
          {"num_meshes", c.num_meshes},
          {"triangulation",
           {{"max_area", optional_number(c.triangulation.max_area)},
            {"min_angle_deg", optional_number(c.triangulation.min_angle_deg)},
            {"vertex_budget", c.triangulation.vertex_budget}}},
          {"mirror", c.mirror},
          {"aggregate", c.aggregate},
          {"base_dir", c.base_dir.string()}};
}

GenerationConfig config_from_json(const Json& j) {
  const std::string where = "config";
  if (!j.is_object()) throw ValidationError("config must be an object");
  GenerationConfig c;
  const auto& ps = field(j, "placements", where);
  if (!ps.is_array()) throw ValidationError("config.placements must be an array");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    c.placements.push_back(placement_from_json(ps[i], fmt::format("config.placements[{}]", i)));
  }
  if (j.contains("num_meshes")) {
    const auto& n = j["num_meshes"];
    if (!n.is_number_integer()) throw ValidationError("config.num_meshes must be an integer");
    c.num_meshes = n.get<int>();
  }
  if (j.contains("triangulation") && !j["triangulation"].is_null()) {
    const auto& t = j["triangulation"];
    if (!t.is_object()) throw ValidationError("config.triangulation must be an object");
    c.triangulation.max_area = optional_field(t, "max_area", "config.triangulation");
    c.triangulation.min_angle_deg = optional_field(t, "min_angle_deg", "config.triangulation");
    if (t.contains("vertex_budget")) {
      if (!t["vertex_budget"].is_number_unsigned()) {
        throw ValidationError("config.triangulation.vertex_budget must be a positive integer");
      }
      c.triangulation.vertex_budget = t["vertex_budget"].get<std::size_t>();
    }
  }
  if (j.contains("mirror")) c.mirror = boolean(j["mirror"], "config.mirror");
  if (j.contains("aggregate")) c.aggregate = boolean(j["aggregate"], "config.aggregate");
  if (j.contains("base_dir")) c.base_dir = text(j["base_dir"], "config.base_dir");
  validate(c);
  return c;
}

Json to_json(const Manifest& m) {
  return {{"config", to_json(m.config)},
          {"t_values", m.t_values},
          {"meshes", m.meshes},
          {"format", std::string(to_string(m.format))},
          {"tool_version", m.tool_version}};
}

Manifest manifest_from_json(const Json& j) {
  Manifest m;
  m.config = config_from_json(field(j, "config", "manifest"));
  const auto& ts = field(j, "t_values", "manifest");
  const auto& ms = field(j, "meshes", "manifest");
  if (!ts.is_array() || !ms.is_array()) throw ValidationError("manifest.t_values and manifest.meshes must be arrays");
  for (std::size_t i = 0; i < ts.size(); ++i) m.t_values.push_back(number(ts[i], fmt::format("manifest.t_values[{}]", i)));
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto name = text(ms[i], fmt::format("manifest.meshes[{}]", i));
    if (name.empty() || fs::path(name).filename() != name) {
      throw ValidationError(fmt::format("manifest.meshes[{}] must be a plain file name", i));
    }
    m.meshes.push_back(name);
  }
  if (m.meshes.size() != m.t_values.size()) throw ValidationError("manifest lists different numbers of meshes and t values");
  const auto fmt_name = text(field(j, "format", "manifest"), "manifest.format");
  const auto f = parse_mesh_format(fmt_name);
  if (!f) throw ValidationError("manifest.format '" + fmt_name + "' is unknown");
  m.format = *f;
  if (j.contains("tool_version")) m.tool_version = text(j["tool_version"], "manifest.tool_version");
  return m;
}

std::string mesh_file_stem(std::size_t index, std::size_t count) {
  const int width = std::max(3, static_cast<int>(std::to_string(count > 0 ? count - 1 : 0).size()));
  return fmt::format("mesh-{:0{}}", index, width);
}

Manifest write_dataset(const Dataset& d, const fs::path& dir, MeshFileFormat format) {
  fs::create_directories(dir);
  Manifest m;
  m.config = d.config;
  m.t_values = d.t_values;
  m.format = format;
  m.tool_version = std::string(tool_version());
  // An old manifest would describe a half-written directory.
  fs::remove(dir / kManifestFile);
  for (std::size_t i = 0; i < d.meshes.size(); ++i) {
    const auto name = mesh_file_stem(i, d.meshes.size()) + std::string(extension(format));
    write_mesh(d.meshes[i], dir / name, format);
    m.meshes.push_back(name);
  }
  write_text(dir / kManifestFile, to_json(m).dump(2) + "\n");
  return m;
}

Manifest read_manifest(const fs::path& dir) {
  const auto p = dir / kManifestFile;
  if (!fs::exists(p)) throw ValidationError("'" + dir.string() + "' has no " + kManifestFile);
  return manifest_from_json(read_json(p));
}

fs::path mesh_path(const fs::path& dir, const Manifest& m, std::size_t index) {
  if (index >= m.meshes.size()) {
    throw ValidationError(fmt::format("mesh index {} out of range (dataset has {})", index, m.meshes.size()));
  }
  return dir / m.meshes[index];
}

PolygonalMesh read_dataset_mesh(const fs::path& dir, const Manifest& m, std::size_t index) {
  return read_mesh(mesh_path(dir, m, index));
}

std::vector<PolygonalMesh> read_dataset_meshes(const fs::path& dir, const Manifest& m) {
  std::vector<PolygonalMesh> out;
  for (std::size_t i = 0; i < m.meshes.size(); ++i) out.push_back(read_dataset_mesh(dir, m, i));
  return out;
}

std::vector<MeshMetricsSummary> write_analysis(const std::vector<PolygonalMesh>& meshes, const fs::path& out) {
  if (meshes.empty()) throw ValidationError("dataset is empty");
  fs::create_directories(out / "elements");
  fs::create_directories(out / "plots");
  std::vector<MeshMetricsSummary> sums;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const auto el = mesh_element_metrics(meshes[i]);
    std::ofstream os(out / "elements" / (mesh_file_stem(i, meshes.size()) + ".csv"), std::ios::binary);
    if (!os) throw Error("cannot write element metrics under '" + out.string() + "'");
    write_element_csv(os, el);
    sums.push_back(summarize(el));
  }
  {
    std::ofstream os(out / "summary.csv", std::ios::binary);
    if (!os) throw Error("cannot write '" + (out / "summary.csv").string() + "'");
    write_summary_csv(os, sums);
  }
  for (auto metric : kAllMetrics) {
    for (auto stat : {Statistic::min, Statistic::max}) {
      const auto s = line_series(sums, metric, stat);
      const auto name = fmt::format("{}-{}.svg", metric_name(metric), stat == Statistic::min ? "min" : "max");
      export_plot(s, out / "plots" / name, PlotKind::line);
    }
  }
  return sums;
}

Json to_json(const SolverRun& r) {
  Json perf = Json::object();
  for (const auto& [k, v] : r.performances) perf[k] = v;
  return {{"mesh", r.mesh.filename().string()},
          {"stem", mesh_stem(r.mesh)},
          {"status", std::string(to_string(r.status))},
          {"vertex_count", r.vertex_count},
          {"exit_code", r.exit_code},
          {"message", r.message},
          {"stderr", r.stderr_text},
          {"has_ground_truth", r.ground_truth.has_value()},
          {"performances", perf}};
}

void write_runs(const fs::path& dir, const std::string& solver, const std::vector<SolverRun>& runs) {
  fs::create_directories(dir);
  Json list = Json::array();
  for (const auto& r : runs) list.push_back(to_json(r));
  const Json j = {{"solver", solver}, {"tool_version", std::string(tool_version())}, {"runs", list}};
  // Invalid UTF-8 from a solver's stderr is replaced rather than rejected.
  write_text(dir / kRunsFile, j.dump(2, ' ', false, Json::error_handler_t::replace) + "\n");
}

std::vector<SolverRun> read_runs(const fs::path& dir, bool with_fields) {
  const auto p = dir / kRunsFile;
  if (!fs::exists(p)) throw ValidationError("'" + dir.string() + "' has no " + kRunsFile);
  const auto j = read_json(p);
  const auto& list = field(j, "runs", "runs.json");
  if (!list.is_array()) throw ValidationError("runs.json: runs must be an array");
  std::vector<SolverRun> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto where = fmt::format("runs[{}]", i);
    const auto& e = list[i];
    SolverRun r;
    r.mesh = text(field(e, "mesh", where), where + ".mesh");
    r.status = parse_run_status(text(field(e, "status", where), where + ".status"));
    r.vertex_count = field(e, "vertex_count", where).get<std::size_t>();
    r.exit_code = e.value("exit_code", 0);
    r.message = e.value("message", "");
    r.stderr_text = e.value("stderr", "");
    for (const auto& [k, v] : field(e, "performances", where).items()) r.performances[k] = number(v, where + "." + k);
    if (with_fields && r.status == RunStatus::success) {
      const auto stem = mesh_stem(r.mesh);
      try {
        r.solution = read_field(dir / stem / (stem + "-solution.txt"));
        if (e.value("has_ground_truth", false)) r.ground_truth = read_field(dir / stem / (stem + "-ground-truth.txt"));
      } catch (const ProtocolError& err) {
        throw ValidationError(where + ": " + err.what());
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

fs::path builtin_solver_path() {
  if (const char* env = std::getenv("PEMQ_VEM"); env && *env) return env;
  std::error_code ec;
  const auto self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const auto sibling = self.parent_path() / "pemq-vem";
    if (fs::exists(sibling)) return sibling;
  }
  return "pemq-vem";
}

SolverSpec builtin_solver_spec(double timeout_s) {
  SolverSpec s;
  std::string quoted = "'";
  for (char c : builtin_solver_path().string()) quoted += c == '\'' ? std::string("'\\''") : std::string(1, c);
  s.command = quoted + "' {mesh} {outdir}";
  s.timeout_s = timeout_s;
  return s;
}

}  // namespace pemq
