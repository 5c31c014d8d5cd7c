#include "pemq/service.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "pemq/analysis.hpp"
#include "pemq/dataset.hpp"
#include "pemq/error.hpp"
#include "pemq/log.hpp"

namespace pemq {

namespace fs = std::filesystem;

namespace {

// Request-level failures mapped onto HTTP status codes.
struct HttpError : Error {
  int status;
  std::string code;
  HttpError(int s, std::string c, const std::string& msg) : Error(msg), status(s), code(std::move(c)) {}
};

HttpError not_found(const std::string& what) { return {404, "not_found", what}; }
HttpError busy(const std::string& what) { return {409, "busy", what}; }
HttpError bad_request(const std::string& what) { return {400, "bad_request", what}; }

enum class JobStatus { queued, running, done, failed };

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "?";
}

struct JobRecord {
  std::string id;
  std::string kind;  // generate or solve
  JobStatus status = JobStatus::queued;
  double progress = 0.0;
  Json result;  // null until done
  std::string error;
};

JobRecord make_job(const std::string& id, const std::string& kind) {
  JobRecord j;
  j.id = id;
  j.kind = kind;
  return j;
}

Json to_json(const JobRecord& j) {
  return {{"id", j.id},
          {"kind", j.kind},
          {"status", std::string(to_string(j.status))},
          {"progress", j.progress},
          {"result", j.result},
          {"error", j.error.empty() ? Json(nullptr) : Json(j.error)}};
}

Json stat_json(const MetricStat& s) {
  return {{"min", s.min}, {"min_id", s.min_id}, {"max", s.max}, {"max_id", s.max_id}, {"avg", s.avg}};
}

Json summary_json(const MeshMetricsSummary& s) {
  Json metrics = Json::object();
  for (auto m : kAllMetrics) metrics[std::string(metric_name(m))] = stat_json(s[m]);
  return {{"element_count", s.element_count},
          {"triangle_count", s.triangle_count},
          {"polygon_count", s.polygon_count},
          {"metrics", metrics}};
}

Json mesh_json(const PolygonalMesh& m) {
  Json verts = Json::array(), cells = Json::array(), tags = Json::array();
  for (const auto& v : m.vertices) verts.push_back({v.x, v.y});
  for (const auto& c : m.cells) cells.push_back(c);
  for (auto t : m.tags) tags.push_back(std::string(to_string(t)));
  return {{"vertices", verts}, {"cells", cells}, {"tags", tags}};
}

bool valid_id(const std::string& id) { return !id.empty() && id != "." && id != ".." && id.front() != '.'; }

// Largest numeric suffix of `<prefix>-<n>` entries in dir.
std::uint64_t max_suffix(const fs::path& dir, const std::string& prefix) {
  std::uint64_t best = 0;
  std::error_code ec;
  if (!fs::exists(dir, ec)) return 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind(prefix + "-", 0) != 0) continue;
    try {
      best = std::max<std::uint64_t>(best, std::stoull(name.substr(prefix.size() + 1)));
    } catch (const std::exception&) {
    }
  }
  return best;
}

}  // namespace

struct Service::Impl {
  ServiceOptions opts;
  httplib::Server svr;
  std::thread server_thread;

  std::mutex mu;
  std::map<std::string, JobRecord> jobs;
  std::map<std::string, std::string> writing;  // dataset or run id -> job id
  std::map<std::string, std::vector<MeshMetricsSummary>> metrics_cache;
  std::uint64_t next_job = 0, next_dataset = 0, next_run = 0;

  std::mutex qmu;
  std::condition_variable qcv;
  std::deque<std::function<void()>> queue;
  std::vector<std::thread> workers;
  bool stopping = false;

  explicit Impl(ServiceOptions o) : opts(std::move(o)) {
    fs::create_directories(datasets_dir());
    fs::create_directories(runs_dir());
    next_dataset = max_suffix(datasets_dir(), "ds");
    next_run = max_suffix(runs_dir(), "run");
    // Leftovers of jobs interrupted by a restart.
    for (const auto& sub : {datasets_dir(), runs_dir()}) {
      for (const auto& e : fs::directory_iterator(sub)) {
        const auto n = e.path().filename().string();
        if (n.front() == '.' && e.path().extension() == ".tmp") fs::remove_all(e.path());
      }
    }
    for (int i = 0; i < std::max(1, opts.workers); ++i) workers.emplace_back([this] { worker_loop(); });
    routes();
  }

  ~Impl() {
    svr.stop();
    if (server_thread.joinable()) server_thread.join();
    {
      std::lock_guard lk(qmu);
      stopping = true;
    }
    qcv.notify_all();
    for (auto& w : workers) w.join();
  }

  fs::path datasets_dir() const { return opts.data_dir / "datasets"; }
  fs::path runs_dir() const { return opts.data_dir / "runs"; }

  void worker_loop() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lk(qmu);
        qcv.wait(lk, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        task = std::move(queue.front());
        queue.pop_front();
      }
      task();
    }
  }

  void enqueue(std::function<void()> f) {
    {
      std::lock_guard lk(qmu);
      queue.push_back(std::move(f));
    }
    qcv.notify_one();
  }

  void update_job(const std::string& id, const std::function<void(JobRecord&)>& f) {
    std::lock_guard lk(mu);
    auto& j = jobs.at(id);
    if (j.status == JobStatus::done || j.status == JobStatus::failed) return;  // terminal states are final
    f(j);
  }

  // Complete dataset directory, or 409/404.
  fs::path dataset_dir(const std::string& id) {
    if (!valid_id(id)) throw not_found("unknown dataset '" + id + "'");
    {
      std::lock_guard lk(mu);
      if (writing.count("ds:" + id)) throw busy("dataset '" + id + "' is still being generated");
    }
    const auto d = datasets_dir() / id;
    if (!fs::exists(d / kManifestFile)) throw not_found("unknown dataset '" + id + "'");
    return d;
  }

  fs::path run_dir(const std::string& id) {
    if (!valid_id(id)) throw not_found("unknown run '" + id + "'");
    {
      std::lock_guard lk(mu);
      if (writing.count("run:" + id)) throw busy("run '" + id + "' is still in progress");
    }
    const auto d = runs_dir() / id;
    if (!fs::exists(d / kRunsFile)) throw not_found("unknown run '" + id + "'");
    return d;
  }

  std::vector<MeshMetricsSummary> summaries(const std::string& id) {
    const auto dir = dataset_dir(id);
    {
      std::lock_guard lk(mu);
      if (auto it = metrics_cache.find(id); it != metrics_cache.end()) return it->second;
    }
    const auto man = read_manifest(dir);
    std::vector<MeshMetricsSummary> out;
    for (std::size_t i = 0; i < man.meshes.size(); ++i) out.push_back(summarize_mesh(read_dataset_mesh(dir, man, i)));
    std::lock_guard lk(mu);
    metrics_cache[id] = out;
    return out;
  }

  static Json parse_body(const httplib::Request& req) {
    try {
      return Json::parse(req.body);
    } catch (const Json::exception& e) {
      throw bad_request(std::string("malformed JSON body: ") + e.what());
    }
  }

  static std::size_t parse_index(const std::string& s) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw bad_request("mesh index '" + s + "' is not a number");
    }
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Maps library exceptions to status codes and JSON error bodies.
  static httplib::Server::Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      auto fail = [&](int status, const std::string& code, const std::string& msg) {
        res.status = status;
        res.set_content(Json{{"error", code}, {"message", msg}}.dump(-1, ' ', false, Json::error_handler_t::replace),
                        "application/json");
      };
      try {
        h(req, res);
      } catch (const HttpError& e) {
        fail(e.status, e.code, e.what());
      } catch (const ValidationError& e) {
        fail(422, "validation", e.what());
      } catch (const GeometryError& e) {
        fail(422, "geometry", e.what());
      } catch (const NumericalError& e) {
        fail(422, "numerical", e.what());
      } catch (const ParseError& e) {
        fail(422, "parse", e.what());
      } catch (const std::exception& e) {
        logger().error("{} {}: {}", req.method, req.path, e.what());
        fail(500, "internal", e.what());
      }
    };
  }

  static void reply(httplib::Response& res, const Json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(-1, ' ', false, Json::error_handler_t::replace), "application/json");
  }

  void post_dataset(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.is_object()) throw bad_request("body must be a JSON object");
    const auto& cfg_json = body.contains("config") ? body["config"] : body;
    auto cfg = config_from_json(cfg_json);
    if (cfg.base_dir.empty()) cfg.base_dir = opts.data_dir;
    const auto ts = family_parameters(cfg.num_meshes);
    // Placement problems are cheap to find now and belong in the response.
    for (std::size_t i = 0; i < ts.size(); ++i) {
      try {
        place_all(cfg, ts[i]);
      } catch (const Error& e) {
        throw ValidationError(fmt::format("mesh {} (t={:g}): {}", i, ts[i], e.what()));
      }
    }
    std::string ds, job;
    {
      std::lock_guard lk(mu);
      ds = fmt::format("ds-{}", ++next_dataset);
      job = fmt::format("job-{}", ++next_job);
      writing["ds:" + ds] = job;
      jobs[job] = make_job(job, "generate");
    }
    enqueue([this, cfg, ds, job] { run_generate(cfg, ds, job); });
    reply(res, {{"job_id", job}, {"dataset_id", ds}}, 202);
  }

  void run_generate(const GenerationConfig& cfg, const std::string& ds, const std::string& job) {
    update_job(job, [](JobRecord& j) { j.status = JobStatus::running; });
    const auto tmp = datasets_dir() / ("." + ds + ".tmp");
    try {
      Dataset d;
      d.config = cfg;
      d.t_values = family_parameters(cfg.num_meshes);
      if (opts.jobs_per_task > 1) {
        d = generate_dataset(cfg, opts.jobs_per_task);
      } else {
        for (std::size_t i = 0; i < d.t_values.size(); ++i) {
          try {
            d.meshes.push_back(generate_mesh(cfg, d.t_values[i]));
          } catch (const Error& e) {
            throw Error(fmt::format("mesh {} (t={:g}): {}", i, d.t_values[i], e.what()));
          }
          const double p = static_cast<double>(i + 1) / static_cast<double>(d.t_values.size() + 1);
          update_job(job, [p](JobRecord& j) { j.progress = p; });
        }
      }
      fs::remove_all(tmp);
      write_dataset(d, tmp, MeshFileFormat::off);
      fs::rename(tmp, datasets_dir() / ds);
      std::lock_guard lk(mu);
      writing.erase("ds:" + ds);
      auto& j = jobs.at(job);
      j.status = JobStatus::done;
      j.progress = 1.0;
      j.result = {{"dataset_id", ds}};
    } catch (const std::exception& e) {
      std::error_code ec;
      fs::remove_all(tmp, ec);
      std::lock_guard lk(mu);
      writing.erase("ds:" + ds);
      auto& j = jobs.at(job);
      j.status = JobStatus::failed;
      j.error = e.what();
    }
  }

  void post_run(const std::string& ds, const httplib::Request& req, httplib::Response& res) {
    const auto dir = dataset_dir(ds);
    const auto body = parse_body(req);
    if (!body.is_object()) throw bad_request("body must be a JSON object");
    double timeout = 600.0;
    if (body.contains("timeout_s")) {
      if (!body["timeout_s"].is_number()) throw ValidationError("timeout_s must be a number");
      timeout = body["timeout_s"].get<double>();
    }
    SolverSpec spec;
    std::string label;
    const bool builtin = body.value("builtin", false);
    if (builtin == body.contains("command")) throw ValidationError("give exactly one of builtin:true or command");
    if (builtin) {
      spec = builtin_solver_spec(timeout);
      label = "builtin-vem";
    } else {
      if (!body["command"].is_string()) throw ValidationError("command must be a string");
      spec.command = body["command"].get<std::string>();
      spec.timeout_s = timeout;
      label = spec.command;
    }
    validate(spec);
    std::string run, job;
    {
      std::lock_guard lk(mu);
      run = fmt::format("run-{}", ++next_run);
      job = fmt::format("job-{}", ++next_job);
      writing["run:" + run] = job;
      jobs[job] = make_job(job, "solve");
    }
    enqueue([this, spec, label, dir, ds, run, job] { run_solve(spec, label, dir, ds, run, job); });
    reply(res, {{"job_id", job}, {"run_id", run}}, 202);
  }

  void run_solve(const SolverSpec& spec, const std::string& label, const fs::path& dir, const std::string& ds,
                 const std::string& run, const std::string& job) {
    update_job(job, [](JobRecord& j) { j.status = JobStatus::running; });
    const auto tmp = runs_dir() / ("." + run + ".tmp");
    try {
      const auto man = read_manifest(dir);
      fs::remove_all(tmp);
      fs::create_directories(tmp);
      std::vector<SolverRun> runs;
      for (std::size_t i = 0; i < man.meshes.size(); ++i) {
        const auto mesh = mesh_path(dir, man, i);
        runs.push_back(run_solver(spec, mesh, tmp / mesh_stem(mesh)));
        const double p = static_cast<double>(i + 1) / static_cast<double>(man.meshes.size() + 1);
        update_job(job, [p](JobRecord& j) { j.progress = p; });
      }
      write_runs(tmp, label, runs);
      {
        std::ofstream os(tmp / "origin.json");
        os << Json{{"dataset_id", ds}}.dump() << "\n";
      }
      fs::rename(tmp, runs_dir() / run);
      std::size_t ok = 0;
      for (const auto& r : runs) ok += r.status == RunStatus::success;
      std::lock_guard lk(mu);
      writing.erase("run:" + run);
      auto& j = jobs.at(job);
      j.status = JobStatus::done;
      j.progress = 1.0;
      j.result = {{"run_id", run}, {"succeeded", ok}, {"total", runs.size()}};
    } catch (const std::exception& e) {
      std::error_code ec;
      fs::remove_all(tmp, ec);
      std::lock_guard lk(mu);
      writing.erase("run:" + run);
      auto& j = jobs.at(job);
      j.status = JobStatus::failed;
      j.error = e.what();
    }
  }

  // Most recent complete run made by this service for the dataset.
  std::string latest_run(const std::string& ds) {
    std::string best;
    std::uint64_t best_n = 0;
    for (const auto& e : fs::directory_iterator(runs_dir())) {
      const auto name = e.path().filename().string();
      if (name.rfind("run-", 0) != 0 || !fs::exists(e.path() / kRunsFile) || !fs::exists(e.path() / "origin.json")) {
        continue;
      }
      std::ifstream is(e.path() / "origin.json");
      const auto j = Json::parse(is, nullptr, false);
      if (j.is_discarded() || j.value("dataset_id", "") != ds) continue;
      std::uint64_t n = 0;
      try {
        n = std::stoull(name.substr(4));
      } catch (const std::exception&) {
        continue;
      }
      if (best.empty() || n > best_n) {
        best = name;
        best_n = n;
      }
    }
    return best;
  }

  void get_correlation(const std::string& ds, const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("x") || !req.has_param("y")) throw bad_request("query parameters x and y are required");
    Selector x, y;
    try {
      x = Selector::parse(req.get_param_value("x"));
      y = Selector::parse(req.get_param_value("y"));
    } catch (const ValidationError& e) {
      throw bad_request(e.what());
    }
    const auto sums = summaries(ds);
    std::vector<SolverRun> runs;
    std::string run_id;
    if (x.kind == Selector::Kind::performance || y.kind == Selector::Kind::performance) {
      run_id = req.has_param("run") ? req.get_param_value("run") : latest_run(ds);
      if (run_id.empty()) throw ValidationError("dataset '" + ds + "' has no completed solver run");
      runs = read_runs(run_dir(run_id));
    }
    const auto s = scatter(sums, runs, x, y);
    if (!s.coefficients.pearson_r) throw ValidationError("zero variance: correlation is undefined for a constant series");
    Json pts = Json::array();
    for (const auto& p : s.points) pts.push_back({{"x", p.x}, {"y", p.y}, {"mesh", p.mesh}});
    reply(res, {{"x_label", s.x_label},
                {"y_label", s.y_label},
                {"points", pts},
                {"skipped", s.skipped},
                {"pearson_r", *s.coefficients.pearson_r},
                {"spearman_rho", *s.coefficients.spearman_rho},
                {"run_id", run_id.empty() ? Json(nullptr) : Json(run_id)}});
  }

  void routes() {
    svr.Post("/api/datasets", wrap([this](const auto& req, auto& res) { post_dataset(req, res); }));
    svr.Get("/api/datasets", wrap([this](const auto&, auto& res) {
              std::vector<std::string> ids;
              for (const auto& e : fs::directory_iterator(datasets_dir())) {
                const auto n = e.path().filename().string();
                if (valid_id(n) && fs::exists(e.path() / kManifestFile)) ids.push_back(n);
              }
              std::sort(ids.begin(), ids.end());
              reply(res, {{"datasets", ids}});
            }));
    svr.Get(R"(/api/jobs/([A-Za-z0-9_.\-]+))", wrap([this](const auto& req, auto& res) {
              std::lock_guard lk(mu);
              const auto it = jobs.find(req.matches[1]);
              if (it == jobs.end()) throw not_found("unknown job '" + std::string(req.matches[1]) + "'");
              reply(res, to_json(it->second));
            }));
    svr.Get(R"(/api/datasets/([A-Za-z0-9_.\-]+))", wrap([this](const auto& req, auto& res) {
              const std::string id = req.matches[1];
              auto j = to_json(read_manifest(dataset_dir(id)));
              j["id"] = id;
              reply(res, j);
            }));
    svr.Get(R"(/api/datasets/([A-Za-z0-9_.\-]+)/meshes/([^/]+))", wrap([this](const auto& req, auto& res) {
              const std::string id = req.matches[1];
              const auto dir = dataset_dir(id);
              const auto man = read_manifest(dir);
              const auto i = parse_index(req.matches[2]);
              if (i >= man.meshes.size()) throw not_found(fmt::format("dataset '{}' has no mesh {}", id, i));
              reply(res, mesh_json(read_dataset_mesh(dir, man, i)));
            }));
    svr.Get(R"(/api/datasets/([A-Za-z0-9_.\-]+)/metrics)", wrap([this](const auto& req, auto& res) {
              const auto sums = summaries(req.matches[1]);
              Json js = Json::array(), series = Json::array();
              for (const auto& s : sums) js.push_back(summary_json(s));
              for (const auto& s : dataset_series(sums)) {
                Json mn = Json::array(), mx = Json::array(), av = Json::array();
                for (const auto& p : s.points) {
                  mn.push_back(p.min);
                  mx.push_back(p.max);
                  av.push_back(p.avg);
                }
                series.push_back({{"metric", std::string(metric_name(s.metric))}, {"min", mn}, {"max", mx}, {"avg", av}});
              }
              reply(res, {{"summaries", js}, {"series", series}});
            }));
    svr.Get(R"(/api/datasets/([A-Za-z0-9_.\-]+)/meshes/([^/]+)/metrics)", wrap([this](const auto& req, auto& res) {
              const std::string id = req.matches[1];
              const auto dir = dataset_dir(id);
              const auto man = read_manifest(dir);
              const auto i = parse_index(req.matches[2]);
              if (i >= man.meshes.size()) throw not_found(fmt::format("dataset '{}' has no mesh {}", id, i));
              const auto el = mesh_element_metrics(read_dataset_mesh(dir, man, i));
              Json elements = Json::array();
              for (const auto& e : el) {
                Json row = Json::object();
                for (auto m : kAllMetrics) row[std::string(metric_name(m))] = e[m];
                row["MA/mA"] = e.angle_ratio();
                elements.push_back(row);
              }
              reply(res, {{"elements", elements}, {"summary", summary_json(summarize(el))}});
            }));
    svr.Post(R"(/api/datasets/([A-Za-z0-9_.\-]+)/runs)",
             wrap([this](const auto& req, auto& res) { post_run(req.matches[1], req, res); }));
    svr.Get(R"(/api/runs/([A-Za-z0-9_.\-]+))", wrap([this](const auto& req, auto& res) {
              const std::string id = req.matches[1];
              const auto dir = run_dir(id);
              std::ifstream is(dir / kRunsFile);
              const auto raw = Json::parse(is);
              const auto runs = read_runs(dir, true);
              Json list = Json::array();
              for (const auto& r : runs) {
                auto j = to_json(r);
                j["solution"] = r.solution;
                j["ground_truth"] = r.ground_truth ? Json(*r.ground_truth) : Json(nullptr);
                list.push_back(j);
              }
              Json out = {{"id", id}, {"solver", raw.value("solver", "")}, {"runs", list}, {"dataset_id", nullptr}};
              if (fs::exists(dir / "origin.json")) {
                std::ifstream os(dir / "origin.json");
                const auto o = Json::parse(os, nullptr, false);
                if (!o.is_discarded()) out["dataset_id"] = o.value("dataset_id", "");
              }
              reply(res, out);
            }));
    svr.Get(R"(/api/datasets/([A-Za-z0-9_.\-]+)/correlation)",
            wrap([this](const auto& req, auto& res) { get_correlation(req.matches[1], req, res); }));

    if (!opts.static_dir.empty() && fs::is_directory(opts.static_dir)) {
      svr.set_mount_point("/", opts.static_dir.string());
    } else {
      svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>pemq</title></head>"
            "<body><h1>pemq service</h1><p>No web client is installed. The JSON API lives under "
            "<code>/api/</code>.</p></body></html>\n",
            "text/html");
      });
    }
    svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        res.set_content(Json{{"error", res.status == 404 ? "not_found" : "error"}, {"message", "no such endpoint"}}.dump(),
                        "application/json");
      }
    });
  }
};

Service::Service(ServiceOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}

Service::~Service() = default;

int Service::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->svr.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind to " + host);
  } else if (!impl_->svr.bind_to_port(host, port)) {
    throw Error(fmt::format("cannot bind to {}:{}", host, port));
  }
  impl_->server_thread = std::thread([this] { impl_->svr.listen_after_bind(); });
  impl_->svr.wait_until_ready();
  logger().info("serving on {}:{}", host, bound);
  return bound;
}

void Service::wait() {
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

void Service::stop() { impl_->svr.stop(); }

}  // namespace pemq
