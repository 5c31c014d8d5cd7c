#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pemq/harness.hpp"
#include "pemq/metrics.hpp"

namespace pemq {

/// Either coefficient is nullopt when an input has zero variance.
struct Correlation {
  std::optional<double> pearson_r;
  std::optional<double> spearman_rho;
};

/// Pearson and Spearman (average ranks for ties). Throws ValidationError for
/// different lengths, fewer than two values or non-finite input.
Correlation correlate(std::span<const double> xs, std::span<const double> ys);

/// Average ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> v);

enum class Statistic { min, max, avg };

/// `min(PAR)`, `max(KAR)`, `avg(MA)` pick a per-mesh metric statistic; any
/// other text names a solver performance.
struct Selector {
  enum class Kind { metric, performance };
  Kind kind = Kind::metric;
  Metric metric = Metric::nE;
  Statistic stat = Statistic::min;
  std::string performance;

  /// Throws ValidationError for a malformed `stat(metric)` form or an unknown
  /// metric inside it.
  static Selector parse(std::string_view text);
  std::string label() const;
};

struct ScatterPoint {
  double x = 0.0, y = 0.0;
  std::size_t mesh = 0;
};

struct ScatterSeries {
  std::string x_label, y_label;
  std::vector<ScatterPoint> points;
  std::size_t skipped = 0;  // meshes without a successful run
  Correlation coefficients;
};

/// One point per mesh. `runs` is either empty (metric selectors only) or
/// aligned with `summaries`. Meshes whose run did not succeed are skipped and
/// counted. Throws ValidationError for a performance missing from a
/// successful run (listing the available names), for runs that do not match
/// the dataset, and for fewer than two usable points.
ScatterSeries scatter(std::span<const MeshMetricsSummary> summaries, std::span<const SolverRun> runs,
                      const Selector& x, const Selector& y);

/// x = mesh index, y = the statistic of `metric`.
ScatterSeries line_series(std::span<const MeshMetricsSummary> summaries, Metric metric, Statistic stat);

enum class PlotKind { scatter, line };

/// Writes an SVG image to `svg_path` and the raw numbers to the sibling file
/// with extension .csv (`mesh_index,<x label>,<y label>`). Output depends
/// only on the series. Throws Error when a file cannot be written.
void export_plot(const ScatterSeries& s, const std::filesystem::path& svg_path, PlotKind kind);

std::string render_svg(const ScatterSeries& s, PlotKind kind);
std::string render_csv(const ScatterSeries& s);

}  // namespace pemq
