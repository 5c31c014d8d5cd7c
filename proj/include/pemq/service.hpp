#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace pemq {

struct ServiceOptions {
  std::filesystem::path data_dir;    // holds datasets/<id> and runs/<id>
  std::filesystem::path static_dir;  // served at /; empty: a placeholder page
  int workers = 2;                   // concurrent background jobs
  int jobs_per_task = 1;             // --jobs handed to generation and sweeps
};

/// HTTP/JSON API over the dataset directory layout shared with the CLI.
///
///   POST /api/datasets                       {config} -> 202 {job_id, dataset_id}
///   GET  /api/jobs/{id}                      job record
///   GET  /api/datasets                       ids of complete datasets
///   GET  /api/datasets/{id}                  manifest
///   GET  /api/datasets/{id}/meshes/{i}       {vertices, cells, tags}
///   GET  /api/datasets/{id}/metrics          summaries and series
///   GET  /api/datasets/{id}/meshes/{i}/metrics
///   POST /api/datasets/{id}/runs             {builtin:true | command} -> 202
///   GET  /api/runs/{id}                      run records with vertex fields
///   GET  /api/datasets/{id}/correlation?x=&y=[&run=]
///
/// Errors: 400 malformed request, 404 unknown id, 409 still being written,
/// 422 validation failure. Error bodies are {error, message}.
class Service {
 public:
  explicit Service(ServiceOptions opts);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws Error when binding fails.
  int start(const std::string& host, int port);
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pemq
