#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pemq/geometry.hpp"
#include "pemq/mesh.hpp"

namespace pemq {

enum class Metric { nE, IC, CC, CR, AR, KE, KAR, PAR, MA, mA, SE, ER, MPD, NPD, SRG };

inline constexpr std::size_t kMetricCount = 15;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics{
    Metric::nE, Metric::IC, Metric::CC, Metric::CR,  Metric::AR,  Metric::KE,  Metric::KAR, Metric::PAR,
    Metric::MA, Metric::mA, Metric::SE, Metric::ER,  Metric::MPD, Metric::NPD, Metric::SRG};

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

/// Direction marker from the metric table: +1 when larger is better, 0 when
/// the table gives none.
int metric_direction(Metric m);
bool metric_scale_invariant(Metric m);

struct ElementMetrics {
  std::array<double, kMetricCount> values{};

  double operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
  double& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }

  /// MA / mA, exported next to the core metrics.
  double angle_ratio() const { return (*this)[Metric::MA] / (*this)[Metric::mA]; }
};

ElementMetrics element_metrics(const Polygon2& p);

struct MetricStat {
  double min = 0.0;
  std::size_t min_id = 0;
  double max = 0.0;
  std::size_t max_id = 0;
  double avg = 0.0;
};

struct MeshMetricsSummary {
  std::array<MetricStat, kMetricCount> stats{};
  std::size_t element_count = 0;
  std::size_t triangle_count = 0;
  std::size_t polygon_count = 0;

  const MetricStat& operator[](Metric m) const { return stats[static_cast<std::size_t>(m)]; }
};

/// Metrics of every cell, in cell order.
std::vector<ElementMetrics> mesh_element_metrics(const PolygonalMesh& m);

/// Ties resolve to the lowest element id. Throws on empty input.
MeshMetricsSummary summarize(std::span<const ElementMetrics> elements);
MeshMetricsSummary summarize_mesh(const PolygonalMesh& m);

struct SeriesPoint {
  double min, max, avg;
};

struct MetricSeries {
  Metric metric;
  std::vector<SeriesPoint> points;  // indexed by mesh position in the dataset
};

/// One series per metric over the dataset's meshes. Throws on empty input.
std::vector<MetricSeries> dataset_series(std::span<const MeshMetricsSummary> summaries);

/// Header "nE,IC,...,SRG,MA/mA", one row per element, 12 significant digits.
void write_element_csv(std::ostream& out, std::span<const ElementMetrics> elements);

/// Header "mesh,stat,nE,...,SRG"; five rows per mesh with stat = min, max,
/// avg, argmin, argmax (the last two hold attaining element ids).
void write_summary_csv(std::ostream& out, std::span<const MeshMetricsSummary> summaries);

}  // namespace pemq
