#include "pemq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "pemq/error.hpp"

namespace pemq {

namespace {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool all_equal(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

std::string_view stat_name(Statistic s) {
  switch (s) {
    case Statistic::min: return "min";
    case Statistic::max: return "max";
    case Statistic::avg: return "avg";
  }
  return "?";
}

double stat_value(const MetricStat& st, Statistic s) {
  switch (s) {
    case Statistic::min: return st.min;
    case Statistic::max: return st.max;
    case Statistic::avg: return st.avg;
  }
  return 0.0;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  const double first = std::ceil(lo / step);
  for (int k = 0; k < 12; ++k) {
    const double v = (first + k) * step;
    if (v > hi + 1e-9 * span) break;
    out.push_back(std::fabs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

std::pair<double, double> padded_range(double lo, double hi) {
  if (lo == hi) {
    const double d = lo == 0.0 ? 1.0 : 0.1 * std::fabs(lo);
    return {lo - d, hi + d};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  os << text;
  if (!os) throw Error("write failed for '" + p.string() + "'");
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

Correlation correlate(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ValidationError(fmt::format("series lengths differ ({} and {})", xs.size(), ys.size()));
  }
  if (xs.size() < 2) throw ValidationError("correlation needs at least two points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw ValidationError(fmt::format("non-finite value at point {}", i));
  }
  Correlation c;
  if (all_equal(xs) || all_equal(ys)) return c;
  c.pearson_r = pearson(xs, ys);
  const auto rx = average_ranks(xs), ry = average_ranks(ys);
  c.spearman_rho = pearson(rx, ry);
  return c;
}

Selector Selector::parse(std::string_view text) {
  Selector s;
  const auto open = text.find('(');
  if (open == std::string_view::npos) {
    if (text.empty() || text.find(')') != std::string_view::npos) {
      throw ValidationError("malformed selector '" + std::string(text) + "'");
    }
    s.kind = Kind::performance;
    s.performance = std::string(text);
    return s;
  }
  if (text.back() != ')') throw ValidationError("malformed selector '" + std::string(text) + "'");
  const auto stat = text.substr(0, open);
  const auto name = text.substr(open + 1, text.size() - open - 2);
  if (stat == "min") {
    s.stat = Statistic::min;
  } else if (stat == "max") {
    s.stat = Statistic::max;
  } else if (stat == "avg") {
    s.stat = Statistic::avg;
  } else {
    throw ValidationError("unknown statistic '" + std::string(stat) + "' (use min, max or avg)");
  }
  const auto m = parse_metric(name);
  if (!m) throw ValidationError("unknown metric '" + std::string(name) + "'");
  s.kind = Kind::metric;
  s.metric = *m;
  return s;
}

std::string Selector::label() const {
  if (kind == Kind::performance) return performance;
  return fmt::format("{}({})", stat_name(stat), metric_name(metric));
}

ScatterSeries scatter(std::span<const MeshMetricsSummary> summaries, std::span<const SolverRun> runs,
                      const Selector& x, const Selector& y) {
  const bool needs_runs = x.kind == Selector::Kind::performance || y.kind == Selector::Kind::performance;
  if (needs_runs && runs.empty()) throw ValidationError("selector '" + (x.kind == Selector::Kind::performance ? x : y).label() + "' needs solver runs");
  if (!runs.empty() && runs.size() != summaries.size()) {
    throw ValidationError(fmt::format("{} solver runs for {} meshes", runs.size(), summaries.size()));
  }
  // Performance names must be present in every successful run.
  if (needs_runs) {
    std::set<std::string> available;
    bool first = true;
    for (const auto& r : runs) {
      if (r.status != RunStatus::success) continue;
      std::set<std::string> names;
      for (const auto& [k, v] : r.performances) names.insert(k);
      if (first) {
        available = names;
        first = false;
      } else {
        std::set<std::string> keep;
        std::set_intersection(available.begin(), available.end(), names.begin(), names.end(),
                              std::inserter(keep, keep.begin()));
        available = keep;
      }
    }
    for (const auto* sel : {&x, &y}) {
      if (sel->kind != Selector::Kind::performance || available.count(sel->performance)) continue;
      std::string list;
      for (const auto& n : available) list += (list.empty() ? "" : ", ") + n;
      throw ValidationError("unknown performance '" + sel->performance + "'; available: " + (list.empty() ? "none" : list));
    }
  }

  ScatterSeries s;
  s.x_label = x.label();
  s.y_label = y.label();
  auto value = [&](const Selector& sel, std::size_t i) {
    if (sel.kind == Selector::Kind::metric) return stat_value(summaries[i][sel.metric], sel.stat);
    return runs[i].performances.at(sel.performance);
  };
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (needs_runs && runs[i].status != RunStatus::success) {
      ++s.skipped;
      continue;
    }
    s.points.push_back({value(x, i), value(y, i), i});
  }
  if (s.points.size() < 2) {
    throw ValidationError(fmt::format("only {} usable point(s); a scatter needs at least two", s.points.size()));
  }
  std::vector<double> xs, ys;
  for (const auto& p : s.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  s.coefficients = correlate(xs, ys);
  return s;
}

ScatterSeries line_series(std::span<const MeshMetricsSummary> summaries, Metric metric, Statistic stat) {
  ScatterSeries s;
  s.x_label = "mesh";
  s.y_label = fmt::format("{}({})", stat_name(stat), metric_name(metric));
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    s.points.push_back({static_cast<double>(i), stat_value(summaries[i][metric], stat), i});
  }
  if (s.points.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& p : s.points) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
    s.coefficients = correlate(xs, ys);
  }
  return s;
}

std::string render_csv(const ScatterSeries& s) {
  std::string out = "mesh_index," + csv_field(s.x_label) + "," + csv_field(s.y_label) + "\n";
  for (const auto& p : s.points) out += fmt::format("{},{:.17g},{:.17g}\n", p.mesh, p.x, p.y);
  return out;
}

std::string render_svg(const ScatterSeries& s, PlotKind kind) {
  constexpr double W = 640, H = 480, L = 80, R = 20, T = 40, B = 60;
  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (!s.points.empty()) {
    const auto [xa, xb] = std::minmax_element(s.points.begin(), s.points.end(),
                                              [](const auto& a, const auto& b) { return a.x < b.x; });
    const auto [ya, yb] = std::minmax_element(s.points.begin(), s.points.end(),
                                              [](const auto& a, const auto& b) { return a.y < b.y; });
    std::tie(xlo, xhi) = padded_range(xa->x, xb->x);
    std::tie(ylo, yhi) = padded_range(ya->y, yb->y);
  }
  auto px = [&](double x) { return L + (x - xlo) / (xhi - xlo) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ylo) / (yhi - ylo) * (H - T - B); };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                     W, H, W, H);
  out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::string title = xml_escape(s.y_label) + " vs " + xml_escape(s.x_label);
  if (s.coefficients.pearson_r) {
    title += fmt::format(" (pearson {:.3f}, spearman {:.3f})", *s.coefficients.pearson_r,
                         s.coefficients.spearman_rho.value_or(0.0));
  }
  out += fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                     W / 2, title);
  // axes
  out += fmt::format("<g stroke=\"black\" stroke-width=\"1\"><line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>"
                     "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/></g>\n",
                     L, H - B, W - R, H - B, L, T, L, H - B);
  out += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v : ticks(xlo, xhi)) {
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"black\"/>"
                       "<text x=\"{0:.2f}\" y=\"{3}\" text-anchor=\"middle\">{4:.4g}</text>\n",
                       px(v), H - B, H - B + 5, H - B + 18, v);
  }
  for (double v : ticks(ylo, yhi)) {
    out += fmt::format("<line x1=\"{1}\" y1=\"{0:.2f}\" x2=\"{2}\" y2=\"{0:.2f}\" stroke=\"black\"/>"
                       "<text x=\"{3}\" y=\"{0:.2f}\" text-anchor=\"end\" dominant-baseline=\"middle\">{4:.4g}</text>\n",
                       py(v), L - 5, L, L - 8, v);
  }
  out += "</g>\n";
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
                     (L + W - R) / 2, H - 15, xml_escape(s.x_label));
  out += fmt::format("<text x=\"20\" y=\"{0}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
                     "transform=\"rotate(-90 20 {0})\">{1}</text>\n",
                     (T + H - B) / 2, xml_escape(s.y_label));
  if (kind == PlotKind::line && s.points.size() > 1) {
    auto sorted = s.points;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    out += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      out += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(sorted[i].x), py(sorted[i].y));
    }
    out += "\"/>\n";
  }
  out += "<g fill=\"steelblue\">\n";
  for (const auto& p : s.points) {
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\"><title>mesh {}: ({:.6g}, {:.6g})</title></circle>\n",
                       px(p.x), py(p.y), p.mesh, p.x, p.y);
  }
  out += "</g>\n</svg>\n";
  return out;
}

void export_plot(const ScatterSeries& s, const std::filesystem::path& svg_path, PlotKind kind) {
  write_text(svg_path, render_svg(s, kind));
  auto csv = svg_path;
  csv.replace_extension(".csv");
  write_text(csv, render_csv(s));
}

}  // namespace pemq
