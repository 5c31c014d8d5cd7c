#include "pemq/cli.hpp"

#include <csignal>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pemq/analysis.hpp"
#include "pemq/dataset.hpp"
#include "pemq/error.hpp"
#include "pemq/log.hpp"
#include "pemq/service.hpp"

namespace pemq {

namespace fs = std::filesystem;

namespace {

struct Options {
  int jobs = 1;
  std::string log_level;

  // generate
  fs::path placements, config, out;
  std::optional<int> num_meshes;
  std::optional<double> max_area, min_angle;
  bool mirror = false, aggregate = false;
  std::string format = "off";

  // analyze, solve, correlate
  fs::path dataset, runs;
  bool builtin = false;
  std::string command;
  double timeout = 600.0;
  std::string x, y;

  // serve
  int port = 8080;
  std::string host = "127.0.0.1";
  fs::path data, static_dir;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  os << text;
}

GenerationConfig load_config(const Options& o) {
  GenerationConfig c;
  if (!o.config.empty()) {
    std::ifstream is(o.config, std::ios::binary);
    if (!is) throw ValidationError("cannot read '" + o.config.string() + "'");
    Json j;
    try {
      j = Json::parse(is);
    } catch (const Json::exception& e) {
      throw ValidationError(o.config.filename().string() + ": " + e.what());
    }
    c = config_from_json(j.contains("config") ? j["config"] : j);
    if (c.base_dir.empty()) c.base_dir = fs::absolute(o.config).parent_path();
  } else {
    c.placements = read_placements(o.placements);
    c.base_dir = fs::absolute(o.placements).parent_path();
  }
  if (o.num_meshes) c.num_meshes = *o.num_meshes;
  if (o.max_area) c.triangulation.max_area = o.max_area;
  if (o.min_angle) c.triangulation.min_angle_deg = o.min_angle;
  if (o.mirror) c.mirror = true;
  if (o.aggregate) c.aggregate = true;
  validate(c);
  return c;
}

int cmd_generate(const Options& o, std::ostream& out) {
  const auto fmt_opt = parse_mesh_format(o.format);
  if (!fmt_opt || *fmt_opt == MeshFileFormat::stl) {
    throw ValidationError("--format must be obj, off or node-ele");
  }
  const auto c = load_config(o);
  const auto d = generate_dataset(c, o.jobs);
  const auto m = write_dataset(d, o.out, *fmt_opt);
  for (std::size_t i = 0; i < m.meshes.size(); ++i) {
    out << fmt::format("{}  t={:.6g}  cells={}  vertices={}\n", m.meshes[i], m.t_values[i], d.meshes[i].num_cells(),
                       d.meshes[i].num_vertices());
  }
  return kExitOk;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  const auto man = read_manifest(o.dataset);
  const auto meshes = read_dataset_meshes(o.dataset, man);
  const auto sums = write_analysis(meshes, o.out);
  out << fmt::format("analyzed {} meshes into {}\n", sums.size(), o.out.string());
  return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const auto man = read_manifest(o.dataset);
  SolverSpec spec;
  std::string label;
  if (o.builtin) {
    spec = builtin_solver_spec(o.timeout);
    label = "builtin-vem";
  } else {
    spec.command = o.command;
    spec.timeout_s = o.timeout;
    label = o.command;
  }
  validate(spec);
  std::vector<fs::path> meshes;
  for (std::size_t i = 0; i < man.meshes.size(); ++i) meshes.push_back(mesh_path(o.dataset, man, i));
  const auto runs = run_dataset(spec, meshes, o.out, o.jobs);
  write_runs(o.out, label, runs);
  std::size_t bad = 0;
  for (const auto& r : runs) {
    std::string perf;
    for (const auto& [k, v] : r.performances) perf += fmt::format("  {}={:.6g}", k, v);
    out << fmt::format("{}  {}{}\n", r.mesh.filename().string(), to_string(r.status), perf);
    if (r.status != RunStatus::success) {
      ++bad;
      err << fmt::format("{}: {}\n", r.mesh.filename().string(), r.message);
    }
  }
  if (bad) {
    err << fmt::format("{} of {} solver runs did not succeed\n", bad, runs.size());
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_correlate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto x = Selector::parse(o.x), y = Selector::parse(o.y);
  const auto man = read_manifest(o.dataset);
  std::vector<MeshMetricsSummary> sums;
  for (std::size_t i = 0; i < man.meshes.size(); ++i) sums.push_back(summarize_mesh(read_dataset_mesh(o.dataset, man, i)));
  std::vector<SolverRun> runs;
  if (!o.runs.empty()) runs = read_runs(o.runs);
  const auto s = scatter(sums, runs, x, y);
  fs::create_directories(o.out);
  export_plot(s, o.out / "scatter.svg", PlotKind::scatter);
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  const Json j = {{"x", s.x_label},
                  {"y", s.y_label},
                  {"points", s.points.size()},
                  {"skipped", s.skipped},
                  {"pearson_r", opt(s.coefficients.pearson_r)},
                  {"spearman_rho", opt(s.coefficients.spearman_rho)}};
  write_file(o.out / "correlation.json", j.dump(2) + "\n");
  if (!s.coefficients.pearson_r) {
    err << "warning: zero variance, the correlation is undefined\n";
    out << fmt::format("{} vs {}: undefined ({} points, {} skipped)\n", s.y_label, s.x_label, s.points.size(), s.skipped);
  } else {
    out << fmt::format("{} vs {}: pearson {:.6f}  spearman {:.6f}  ({} points, {} skipped)\n", s.y_label, s.x_label,
                       *s.coefficients.pearson_r, *s.coefficients.spearman_rho, s.points.size(), s.skipped);
  }
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  // Block the stop signals in every thread and wait for them here.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  ServiceOptions so;
  so.data_dir = o.data;
  so.static_dir = o.static_dir;
  so.jobs_per_task = o.jobs;
  Service svc(so);
  const int port = svc.start(o.host, o.port);
  out << fmt::format("serving {} on http://{}:{}/\n", o.data.string(), o.host, port) << std::flush;
  int sig = 0;
  sigwait(&set, &sig);
  svc.stop();
  svc.wait();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Polygonal mesh quality workbench", "pemq"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(tool_version()));
  app.add_option("--jobs,-j", o.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off (default: $PEMQ_LOG_LEVEL)")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  auto* gen = app.add_subcommand("generate", "Generate a mesh family from placed polygons");
  auto* src = gen->add_option_group("source");
  src->add_option("--placements", o.placements, "Placement CSV")->check(CLI::ExistingFile);
  src->add_option("--config", o.config, "Generation config JSON")->check(CLI::ExistingFile);
  src->require_option(1);
  gen->add_option("--num-meshes,-n", o.num_meshes, "Family size")->check(CLI::PositiveNumber);
  gen->add_option("--max-area", o.max_area, "Largest filler triangle area")->check(CLI::PositiveNumber);
  gen->add_option("--min-angle", o.min_angle, "Smallest filler triangle angle in degrees")->check(CLI::Range(0.0, 30.0));
  gen->add_flag("--mirror", o.mirror, "Mirror across x = 1 and y = 1");
  gen->add_flag("--aggregate", o.aggregate, "Merge filler triangles into polygons");
  gen->add_option("--format", o.format, "Mesh file format")->check(CLI::IsMember({"obj", "off", "node-ele"}));
  gen->add_option("--out,-o", o.out, "Output dataset directory")->required();

  auto* ana = app.add_subcommand("analyze", "Element metrics, summaries and plots");
  ana->add_option("--dataset,-d", o.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  ana->add_option("--out,-o", o.out, "Output directory")->required();

  auto* sol = app.add_subcommand("solve", "Run a solver over every mesh of a dataset");
  sol->add_option("--dataset,-d", o.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  auto* which = sol->add_option_group("solver");
  which->add_flag("--builtin-vem", o.builtin, "Use the built-in VEM Poisson solver");
  which->add_option("--command", o.command, "Command template with {mesh} and {outdir}");
  which->require_option(1);
  sol->add_option("--timeout", o.timeout, "Seconds per mesh")->check(CLI::PositiveNumber);
  sol->add_option("--out,-o", o.out, "Output runs directory")->required();

  auto* cor = app.add_subcommand("correlate", "Scatter of two quantities with correlation coefficients");
  cor->add_option("--dataset,-d", o.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  cor->add_option("--runs,-r", o.runs, "Runs directory from `solve`")->check(CLI::ExistingDirectory);
  cor->add_option("--x", o.x, "Selector such as min(PAR) or a performance name")->required();
  cor->add_option("--y", o.y, "Selector such as min(PAR) or a performance name")->required();
  cor->add_option("--out,-o", o.out, "Output directory")->required();

  auto* srv = app.add_subcommand("serve", "Start the HTTP service");
  srv->add_option("--port,-p", o.port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  srv->add_option("--host", o.host, "Bind address");
  srv->add_option("--data", o.data, "Data directory")->required();
  srv->add_option("--static", o.static_dir, "Directory served at /")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  if (!o.log_level.empty()) logger().set_level(spdlog::level::from_str(o.log_level));
  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (ana->parsed()) return cmd_analyze(o, out);
    if (sol->parsed()) return cmd_solve(o, out, err);
    if (cor->parsed()) return cmd_correlate(o, out, err);
    if (srv->parsed()) return cmd_serve(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace pemq
