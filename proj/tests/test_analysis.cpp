#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pemq/analysis.hpp"
#include "pemq/error.hpp"
#include "xml_check.hpp"

using namespace pemq;
namespace fs = std::filesystem;

namespace {

// Textbook formula with a different accumulation scheme than the library.
double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - sx / n) * (y[i] - sy / n);
    dx += (x[i] - sx / n) * (x[i] - sx / n);
    dy += (y[i] - sy / n) * (y[i] - sy / n);
  }
  return num / std::sqrt(dx) / std::sqrt(dy);
}

MeshMetricsSummary summary_with(double par_min, double kar_min) {
  MeshMetricsSummary s;
  s.stats[static_cast<std::size_t>(Metric::PAR)].min = par_min;
  s.stats[static_cast<std::size_t>(Metric::KAR)].min = kar_min;
  s.stats[static_cast<std::size_t>(Metric::KAR)].max = 1.0;
  s.element_count = 1;
  return s;
}

SolverRun run_with(RunStatus status, double cond) {
  SolverRun r;
  r.status = status;
  if (status == RunStatus::success) {
    r.performances["condition-number"] = cond;
    r.performances["energy-error"] = 0.1;
  }
  return r;
}

}  // namespace

TEST_CASE("correlate examples") {
  const std::vector<double> xs{-2, -1, 0, 0.5, 1, 3};
  std::vector<double> lin, cube;
  for (double x : xs) {
    lin.push_back(2 * x + 1);
    cube.push_back(-x * x * x);
  }
  const auto a = correlate(xs, lin);
  CHECK(*a.pearson_r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*a.spearman_rho == doctest::Approx(1.0).epsilon(1e-12));
  const auto b = correlate(xs, cube);
  CHECK(*b.spearman_rho == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::fabs(*b.pearson_r) < 1.0);
  CHECK(*b.pearson_r == doctest::Approx(naive_pearson(xs, cube)).epsilon(1e-12));

  const std::vector<double> flat(6, 2.5);
  const auto c = correlate(flat, lin);
  CHECK_FALSE(c.pearson_r.has_value());
  CHECK_FALSE(c.spearman_rho.has_value());

  CHECK_THROWS_AS(correlate(std::vector<double>{1.0}, std::vector<double>{2.0}), ValidationError);
  CHECK_THROWS_AS(correlate(xs, std::vector<double>{1, 2}), ValidationError);
  std::vector<double> bad = lin;
  bad[2] = std::nan("");
  CHECK_THROWS_AS(correlate(xs, bad), ValidationError);
}

TEST_CASE("average ranks") {
  const std::vector<double> v{3, 1, 4, 1, 5};
  const auto r = average_ranks(v);
  CHECK(r == std::vector<double>{3, 1.5, 4, 1.5, 5});
  // Spearman with ties equals Pearson on the average ranks
  const std::vector<double> w{2, 2, 7, 1, 9};
  CHECK(*correlate(v, w).spearman_rho == doctest::Approx(naive_pearson(r, average_ranks(w))).epsilon(1e-12));
}

TEST_CASE("coefficient invariance on random series") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.1, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + trial % 30;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = nd(rng);
      y[i] = 0.5 * x[i] + nd(rng);
    }
    const auto base = correlate(x, y);
    REQUIRE(base.pearson_r.has_value());
    CHECK(*base.pearson_r == doctest::Approx(naive_pearson(x, y)).epsilon(1e-12));
    const double a = ud(rng), b = nd(rng) * 5;
    std::vector<double> xa(n), yneg(n), xm(n);
    for (int i = 0; i < n; ++i) {
      xa[i] = a * x[i] + b;
      yneg[i] = -y[i];
      xm[i] = std::exp(x[i]) + x[i] * x[i] * x[i];  // strictly increasing
    }
    CHECK(std::fabs(*correlate(xa, y).pearson_r - *base.pearson_r) <= 1e-12);
    CHECK(std::fabs(*correlate(x, yneg).pearson_r + *base.pearson_r) <= 1e-12);
    CHECK(*correlate(xm, y).spearman_rho == doctest::Approx(*base.spearman_rho).epsilon(1e-12));
    CHECK(*base.pearson_r >= -1.0);
    CHECK(*base.pearson_r <= 1.0);
  }
}

TEST_CASE("selectors") {
  const auto s = Selector::parse("min(PAR)");
  CHECK(s.kind == Selector::Kind::metric);
  CHECK(s.metric == Metric::PAR);
  CHECK(s.stat == Statistic::min);
  CHECK(s.label() == "min(PAR)");
  CHECK(Selector::parse("avg(mA)").metric == Metric::mA);
  const auto p = Selector::parse("condition-number");
  CHECK(p.kind == Selector::Kind::performance);
  CHECK(p.label() == "condition-number");
  CHECK_THROWS_AS(Selector::parse("median(PAR)"), ValidationError);
  CHECK_THROWS_AS(Selector::parse("min(XYZ)"), ValidationError);
  CHECK_THROWS_AS(Selector::parse("min(PAR"), ValidationError);
  CHECK_THROWS_AS(Selector::parse(""), ValidationError);
}

TEST_CASE("scatter") {
  std::vector<MeshMetricsSummary> sums;
  std::vector<SolverRun> runs;
  for (int i = 0; i < 5; ++i) {
    sums.push_back(summary_with(0.9 - 0.1 * i, 0.5 - 0.1 * i));
    runs.push_back(run_with(RunStatus::success, 10.0 * (i + 1)));
  }
  const auto x = Selector::parse("min(PAR)"), y = Selector::parse("condition-number");
  const auto s = scatter(sums, runs, x, y);
  CHECK(s.points.size() == 5);
  CHECK(s.skipped == 0);
  CHECK(s.x_label == "min(PAR)");
  CHECK(s.y_label == "condition-number");
  CHECK(*s.coefficients.pearson_r == doctest::Approx(-1.0));

  runs[1] = run_with(RunStatus::failed, 0);
  runs[3] = run_with(RunStatus::timeout, 0);
  const auto t = scatter(sums, runs, x, y);
  CHECK(t.points.size() + t.skipped == sums.size());
  CHECK(t.skipped == 2);
  CHECK(t.points[1].mesh == 2);

  CHECK_THROWS_WITH_AS(scatter(sums, runs, x, Selector::parse("iterations")),
                       doctest::Contains("available: condition-number, energy-error"), ValidationError);
  CHECK_THROWS_AS(scatter(sums, {}, x, y), ValidationError);
  CHECK_THROWS_AS(scatter(std::span(sums).first(4), runs, x, y), ValidationError);
  for (int i : {0, 2, 4}) runs[i] = run_with(RunStatus::protocol_error, 0);
  runs[2] = run_with(RunStatus::success, 1.0);
  CHECK_THROWS_WITH_AS(scatter(sums, runs, x, y), doctest::Contains("usable"), ValidationError);

  // metric against metric needs no runs
  const auto m = scatter(sums, {}, x, Selector::parse("min(KAR)"));
  CHECK(*m.coefficients.pearson_r == doctest::Approx(1.0));
  const auto flat = scatter(sums, {}, Selector::parse("max(KAR)"), x);
  CHECK_FALSE(flat.coefficients.pearson_r.has_value());
}

TEST_CASE("plot export") {
  const auto dir = fs::temp_directory_path() / "pemq_analysis_tests";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ScatterSeries s;
  s.x_label = "min(PAR)";
  s.y_label = "a<b & \"c\", d";
  for (int i = 0; i < 7; ++i) s.points.push_back({0.1 * i, std::sin(i), static_cast<std::size_t>(i)});
  for (auto kind : {PlotKind::scatter, PlotKind::line}) {
    const auto svg = dir / (kind == PlotKind::line ? "line.svg" : "scatter.svg");
    export_plot(s, svg, kind);
    std::ifstream is(svg);
    std::stringstream text;
    text << is.rdbuf();
    CHECK(xml_check::well_formed(text.str()) == "");
    CHECK(text.str().find("<svg") != std::string::npos);
    auto csv = svg;
    csv.replace_extension(".csv");
    std::ifstream cs(csv);
    std::string line, header;
    std::getline(cs, header);
    CHECK(header == "mesh_index,min(PAR),\"a<b & \"\"c\"\", d\"");
    std::size_t rows = 1;
    while (std::getline(cs, line)) ++rows;
    CHECK(rows == s.points.size() + 1);
    // re-export is byte-identical
    const auto first = text.str();
    export_plot(s, svg, kind);
    std::ifstream again(svg);
    std::stringstream t2;
    t2 << again.rdbuf();
    CHECK(t2.str() == first);
  }
  // a degenerate series still renders
  ScatterSeries one;
  one.points = {{1.0, 1.0, 0}, {1.0, 1.0, 1}};
  CHECK(xml_check::well_formed(render_svg(one, PlotKind::scatter)) == "");
  CHECK_THROWS_AS(export_plot(s, dir / "missing" / "x.svg", PlotKind::scatter), Error);

  std::vector<MeshMetricsSummary> sums{summary_with(0.5, 0.2), summary_with(0.4, 0.1), summary_with(0.3, 0.0)};
  const auto l = line_series(sums, Metric::PAR, Statistic::min);
  CHECK(l.points.size() == 3);
  CHECK(l.points[2].x == 2.0);
  CHECK(l.points[2].y == 0.3);
  CHECK(l.y_label == "min(PAR)");
}
