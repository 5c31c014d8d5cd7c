#include "pemq/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "pemq/error.hpp"

namespace pemq {

namespace {

constexpr std::array<std::string_view, kMetricCount> kNames{"nE", "IC",  "CC", "CR", "AR",  "KE",  "KAR", "PAR",
                                                            "MA", "mA", "SE", "ER", "MPD", "NPD", "SRG"};

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::string_view metric_name(Metric m) { return kNames[static_cast<std::size_t>(m)]; }

std::optional<Metric> parse_metric(std::string_view name) {
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    if (kNames[i] == name) return kAllMetrics[i];
  }
  return std::nullopt;
}

int metric_direction(Metric m) {
  switch (m) {
    case Metric::CR:
    case Metric::KAR:
    case Metric::PAR:
    case Metric::MA:
    case Metric::mA:
    case Metric::ER:
    case Metric::NPD:
    case Metric::SRG: return 1;
    default: return 0;
  }
}

bool metric_scale_invariant(Metric m) {
  switch (m) {
    case Metric::IC:
    case Metric::CC:
    case Metric::AR:
    case Metric::KE:
    case Metric::SE:
    case Metric::MPD: return false;
    default: return true;
  }
}

ElementMetrics element_metrics(const Polygon2& p) {
  ElementMetrics e;
  const auto& pts = p.vertices();
  const double ic = inscribed_circle(p).radius;
  const double cc = min_enclosing_circle(pts).radius;
  const double area = signed_area(p);
  const Kernel ker = kernel(p);
  const double ke = ker.empty() ? 0.0 : ker.area();
  const double per = perimeter(p);
  const auto angles = interior_angles(p);
  const auto [amin, amax] = std::minmax_element(angles.begin(), angles.end());
  const double se = shortest_edge(p);
  const double mpd = min_pairwise_distance(pts);

  e[Metric::nE] = static_cast<double>(p.size());
  e[Metric::IC] = ic;
  e[Metric::CC] = cc;
  e[Metric::CR] = ic / cc;
  e[Metric::AR] = area;
  e[Metric::KE] = ke;
  e[Metric::KAR] = std::min(1.0, ke / area);
  e[Metric::PAR] = 4.0 * std::numbers::pi * area / (per * per);
  e[Metric::MA] = *amin;
  e[Metric::mA] = *amax;
  e[Metric::SE] = se;
  e[Metric::ER] = se / longest_edge(p);
  e[Metric::MPD] = mpd;
  e[Metric::NPD] = std::min(1.0, mpd / (2.0 * cc));
  e[Metric::SRG] = ker.empty() ? 0.0 : std::min(1.0, inscribed_circle(*ker.region).radius / cc);
  return e;
}

std::vector<ElementMetrics> mesh_element_metrics(const PolygonalMesh& m) {
  std::vector<ElementMetrics> out;
  out.reserve(m.num_cells());
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    try {
      out.push_back(element_metrics(m.cell_polygon(c)));
    } catch (const GeometryError& e) {
      throw ValidationError("cell " + std::to_string(c) + ": " + e.what());
    }
  }
  return out;
}

MeshMetricsSummary summarize(std::span<const ElementMetrics> elements) {
  if (elements.empty()) throw ValidationError("cannot summarize an empty mesh");
  MeshMetricsSummary s;
  s.element_count = elements.size();
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    MetricStat st{elements[0].values[k], 0, elements[0].values[k], 0, 0.0};
    double sum = 0.0;
    for (std::size_t i = 0; i < elements.size(); ++i) {
      const double v = elements[i].values[k];
      if (v < st.min) {
        st.min = v;
        st.min_id = i;
      }
      if (v > st.max) {
        st.max = v;
        st.max_id = i;
      }
      sum += v;
    }
    st.avg = std::clamp(sum / static_cast<double>(elements.size()), st.min, st.max);
    s.stats[k] = st;
  }
  for (const auto& e : elements) {
    if (e[Metric::nE] == 3.0) {
      ++s.triangle_count;
    } else {
      ++s.polygon_count;
    }
  }
  return s;
}

MeshMetricsSummary summarize_mesh(const PolygonalMesh& m) {
  const auto elements = mesh_element_metrics(m);
  return summarize(elements);
}

std::vector<MetricSeries> dataset_series(std::span<const MeshMetricsSummary> summaries) {
  if (summaries.empty()) throw ValidationError("cannot build series of an empty dataset");
  std::vector<MetricSeries> out;
  for (auto metric : kAllMetrics) {
    MetricSeries s{metric, {}};
    for (const auto& sum : summaries) s.points.push_back({sum[metric].min, sum[metric].max, sum[metric].avg});
    out.push_back(std::move(s));
  }
  return out;
}

void write_element_csv(std::ostream& out, std::span<const ElementMetrics> elements) {
  for (std::size_t k = 0; k < kMetricCount; ++k) out << kNames[k] << ',';
  out << "MA/mA\n";
  for (const auto& e : elements) {
    for (std::size_t k = 0; k < kMetricCount; ++k) out << fmt12(e.values[k]) << ',';
    out << fmt12(e.angle_ratio()) << '\n';
  }
}

void write_summary_csv(std::ostream& out, std::span<const MeshMetricsSummary> summaries) {
  out << "mesh,stat";
  for (auto name : kNames) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    auto row = [&](std::string_view stat, auto get) {
      out << i << ',' << stat;
      for (const auto& st : s.stats) out << ',' << get(st);
      out << '\n';
    };
    row("min", [](const MetricStat& st) { return fmt12(st.min); });
    row("max", [](const MetricStat& st) { return fmt12(st.max); });
    row("avg", [](const MetricStat& st) { return fmt12(st.avg); });
    row("argmin", [](const MetricStat& st) { return std::to_string(st.min_id); });
    row("argmax", [](const MetricStat& st) { return std::to_string(st.max_id); });
  }
}

}  // namespace pemq
