#include "pemq/meshgen.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <future>
#include <map>
#include <numbers>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "pemq/error.hpp"
#include "pemq/io.hpp"
#include "pemq/log.hpp"

namespace pemq {

namespace fs = std::filesystem;

// ---- sources and placements ----

PolygonSource PolygonSource::parametric(ParametricClass c) {
  PolygonSource s;
  s.kind = Kind::parametric;
  s.cls = c;
  return s;
}

PolygonSource PolygonSource::random(std::uint64_t seed, int n) {
  PolygonSource s;
  s.kind = Kind::random;
  s.seed = seed;
  s.vertex_count = n;
  return s;
}

PolygonSource PolygonSource::file(std::string path) {
  PolygonSource s;
  s.kind = Kind::file;
  s.path = std::move(path);
  return s;
}

namespace {

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) {
    throw ValidationError("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  try {
    return std::stoull(std::string(s));
  } catch (const std::exception&) {
    throw ValidationError("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
}

}  // namespace

PolygonSource PolygonSource::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ValidationError("bad polygon source '" + std::string(text) + "'");
  const auto kind = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  if (kind == "parametric") {
    const auto c = parse_parametric_class(rest);
    if (!c) throw ValidationError("unknown parametric class '" + std::string(rest) + "'");
    return parametric(*c);
  }
  if (kind == "random") {
    const auto sep = rest.find(':');
    if (sep == std::string_view::npos) throw ValidationError("random source needs 'random:<seed>:<n>'");
    const auto seed = parse_u64(rest.substr(0, sep), "seed");
    const auto n = parse_u64(rest.substr(sep + 1), "vertex count");
    if (n < 3 || n > 100000) throw ValidationError("random polygon vertex count must be at least 3");
    return random(seed, static_cast<int>(n));
  }
  if (kind == "file") {
    if (rest.empty()) throw ValidationError("file source needs a path");
    return file(std::string(rest));
  }
  throw ValidationError("unknown polygon source kind '" + std::string(kind) + "'");
}

std::string PolygonSource::to_string() const {
  switch (kind) {
    case Kind::parametric: return "parametric:" + std::string(class_name(cls));
    case Kind::random: return fmt::format("random:{}:{}", seed, vertex_count);
    case Kind::file: return "file:" + path;
  }
  return "";
}

void validate(const Placement& p) {
  const std::string who = "placement '" + p.id + "': ";
  if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y) || !std::isfinite(p.rotation_deg)) {
    throw ValidationError(who + "non-finite value");
  }
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) throw ValidationError(who + "scale must be positive");
  if (p.source.kind == PolygonSource::Kind::random && p.source.vertex_count < 3) {
    throw ValidationError(who + "random polygon needs at least 3 vertices");
  }
  if (p.param) {
    if (p.source.kind != PolygonSource::Kind::parametric) {
      throw ValidationError(who + "param only applies to parametric sources");
    }
    if (!(*p.param >= 0.0 && *p.param <= 1.0)) throw ValidationError(who + "param must lie in [0, 1]");
  }
}

void validate(const GenerationConfig& c) {
  if (c.num_meshes < 1) throw ValidationError("num_meshes must be at least 1");
  for (const auto& p : c.placements) validate(p);
  for (std::size_t i = 0; i < c.placements.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (c.placements[i].id == c.placements[j].id) {
        throw ValidationError("duplicate placement id '" + c.placements[i].id + "'");
      }
    }
  }
  validate(c.triangulation);
  if (c.num_meshes > 1) {
    const bool varies = std::any_of(c.placements.begin(), c.placements.end(), [](const Placement& p) {
      return p.source.kind == PolygonSource::Kind::parametric && !p.param;
    });
    if (!varies) throw ValidationError("a family of several meshes needs a parametric placement that follows t");
  }
  if (c.aggregate && c.placements.empty()) throw ValidationError("aggregation needs at least one placed polygon");
}

Polygon2 source_polygon(const Placement& p, double t, const fs::path& base_dir) {
  switch (p.source.kind) {
    case PolygonSource::Kind::parametric: return instantiate_parametric(p.source.cls, p.param.value_or(t));
    case PolygonSource::Kind::random: return random_polygon(p.source.seed, p.source.vertex_count);
    case PolygonSource::Kind::file: {
      fs::path path(p.source.path);
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      const auto m = read_mesh(path);
      if (m.num_cells() != 1) {
        throw ValidationError("polygon file '" + path.string() + "' must hold exactly one cell, found " +
                              std::to_string(m.num_cells()));
      }
      return m.cell_polygon(0);
    }
  }
  throw ValidationError("unknown polygon source");
}

Polygon2 place(const Polygon2& p, const Placement& placement) {
  if (!(placement.scale > 0.0)) throw ValidationError("scale must be positive");
  const Point2 c = area_centroid(p);
  const double a = placement.rotation_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(a), sa = std::sin(a), s = placement.scale;
  std::vector<Point2> out;
  out.reserve(p.size());
  for (const auto& v : p.vertices()) {
    const double dx = s * (v.x - c.x), dy = s * (v.y - c.y);
    out.push_back({placement.position.x + ca * dx - sa * dy, placement.position.y + sa * dx + ca * dy});
  }
  for (const auto& v : out) {
    if (v.x < kCanvasMargin || v.x > 1.0 - kCanvasMargin || v.y < kCanvasMargin || v.y > 1.0 - kCanvasMargin) {
      throw GeometryError("placement '" + placement.id + "' is outside canvas");
    }
  }
  return Polygon2(std::move(out));
}

std::vector<Polygon2> place_all(const GenerationConfig& c, double t) {
  std::vector<Polygon2> placed;
  for (const auto& p : c.placements) {
    Polygon2 q = place(source_polygon(p, t, c.base_dir), p);
    for (std::size_t j = 0; j < placed.size(); ++j) {
      if (polygons_intersect(q, placed[j])) {
        throw GeometryError("placement '" + p.id + "' overlaps placement '" + c.placements[j].id + "'");
      }
    }
    placed.push_back(std::move(q));
  }
  return placed;
}

// ---- mirroring ----

namespace {

// Merges vertices closer than tol (grid hashing) and drops unused ones.
PolygonalMesh weld(const PolygonalMesh& m, double tol) {
  struct KeyHash {
    std::size_t operator()(const std::pair<long long, long long>& k) const noexcept {
      return std::hash<long long>()(k.first * 1000003LL) ^ std::hash<long long>()(k.second);
    }
  };
  std::unordered_map<std::pair<long long, long long>, std::vector<std::size_t>, KeyHash> grid;
  std::vector<std::size_t> remap(m.num_vertices());
  PolygonalMesh out;
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    const Point2 p = m.vertices[i];
    const long long gx = static_cast<long long>(std::floor(p.x / tol));
    const long long gy = static_cast<long long>(std::floor(p.y / tol));
    std::optional<std::size_t> found;
    for (long long dx = -1; dx <= 1 && !found; ++dx) {
      for (long long dy = -1; dy <= 1 && !found; ++dy) {
        const auto it = grid.find({gx + dx, gy + dy});
        if (it == grid.end()) continue;
        for (auto j : it->second) {
          if (distance(out.vertices[j], p) <= tol) {
            found = j;
            break;
          }
        }
      }
    }
    if (!found) {
      found = out.vertices.size();
      out.vertices.push_back(p);
      grid[{gx, gy}].push_back(*found);
    }
    remap[i] = *found;
  }
  out.tags = m.tags;
  for (const auto& c : m.cells) {
    Cell nc;
    for (auto v : c) nc.push_back(remap[v]);
    out.cells.push_back(std::move(nc));
  }
  return out;
}

// Drops vertices no cell references, keeping the order of the rest.
void compact(PolygonalMesh& m) {
  std::vector<std::size_t> remap(m.num_vertices(), SIZE_MAX);
  for (const auto& c : m.cells) {
    for (auto v : c) remap[v] = 0;
  }
  std::vector<Point2> kept;
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    if (remap[i] == SIZE_MAX) continue;
    remap[i] = kept.size();
    kept.push_back(m.vertices[i]);
  }
  for (auto& c : m.cells) {
    for (auto& v : c) v = remap[v];
  }
  m.vertices = std::move(kept);
}

}  // namespace

PolygonalMesh mirror(const PolygonalMesh& m) {
  PolygonalMesh tiled;
  const std::size_t n = m.num_vertices();
  const std::array<std::pair<bool, bool>, 4> flips{{{false, false}, {true, false}, {false, true}, {true, true}}};
  for (const auto& [fx, fy] : flips) {
    for (const auto& v : m.vertices) tiled.vertices.push_back({fx ? 2.0 - v.x : v.x, fy ? 2.0 - v.y : v.y});
  }
  for (std::size_t b = 0; b < flips.size(); ++b) {
    const bool reverse = flips[b].first != flips[b].second;
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      Cell cell;
      for (auto v : m.cells[c]) cell.push_back(v + b * n);
      if (reverse) std::reverse(cell.begin(), cell.end());
      tiled.cells.push_back(std::move(cell));
      tiled.tags.push_back(m.tags[c]);
    }
  }
  PolygonalMesh out = weld(tiled, 1e-9);
  for (auto& v : out.vertices) v = {0.5 * v.x, 0.5 * v.y};
  return out;
}

// ---- aggregation ----

std::optional<double> aggregation_bound(const PolygonalMesh& m) {
  std::optional<double> best;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    if (m.tags[c] != CellTag::seed_polygon) continue;
    const double d = diameter(std::span<const Point2>(m.cell_points(c)));
    if (!best || d < *best) best = d;
  }
  return best;
}

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

struct Region {
  std::vector<std::size_t> cells;
  std::map<Edge, std::size_t> boundary;  // directed boundary edge -> owning triangle
  std::map<std::size_t, int> vertex_use;  // boundary vertex -> outgoing boundary edges
  std::vector<std::size_t> vertices;      // every vertex ever added, for the diameter
  double diameter2 = 0.0;
};

}  // namespace

PolygonalMesh aggregate(const PolygonalMesh& m) {
  const auto bound = aggregation_bound(m);
  if (!bound) throw ValidationError("diameter bound undefined: the mesh has no seed polygon");
  const double bound2 = *bound * *bound;

  // edge -> cell owning the directed edge
  std::map<Edge, std::size_t> owner;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& cell = m.cells[c];
    for (std::size_t i = 0; i < cell.size(); ++i) owner[{cell[i], cell[(i + 1) % cell.size()]}] = c;
  }
  auto neighbours = [&](std::size_t c) {
    std::vector<std::size_t> out;
    const auto& cell = m.cells[c];
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const auto it = owner.find({cell[(i + 1) % cell.size()], cell[i]});
      if (it != owner.end()) out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  auto mergeable = [&](std::size_t c) { return m.tags[c] == CellTag::filler_triangle && m.cells[c].size() == 3; };

  // Visit order: breadth first from the seed polygons in id order.
  std::vector<std::size_t> order;
  {
    std::vector<bool> seen(m.num_cells(), false);
    std::vector<std::size_t> queue;
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      if (m.tags[c] == CellTag::seed_polygon) {
        seen[c] = true;
        queue.push_back(c);
      }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (auto nb : neighbours(queue[head])) {
        if (seen[nb]) continue;
        seen[nb] = true;
        queue.push_back(nb);
        if (mergeable(nb)) order.push_back(nb);
      }
    }
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      if (!seen[c] && mergeable(c)) order.push_back(c);
    }
  }

  auto add = [&](Region& r, std::size_t c) {
    r.cells.push_back(c);
    const auto& cell = m.cells[c];
    for (std::size_t i = 0; i < 3; ++i) {
      const Edge e{cell[i], cell[(i + 1) % 3]};
      const auto twin = r.boundary.find({e.second, e.first});
      if (twin != r.boundary.end()) {
        r.boundary.erase(twin);
        --r.vertex_use[e.second];
      } else {
        r.boundary[e] = c;
        ++r.vertex_use[e.first];
      }
    }
    for (auto v : cell) {
      if (std::find(r.vertices.begin(), r.vertices.end(), v) != r.vertices.end()) continue;
      for (auto w : r.vertices) r.diameter2 = std::max(r.diameter2, squared_distance(m.vertices[v], m.vertices[w]));
      r.vertices.push_back(v);
    }
  };
  // Squared diameter of r plus triangle c, or nullopt when the union would
  // not be a disk or would exceed the bound.
  auto evaluate = [&](const Region& r, std::size_t c) -> std::optional<double> {
    const auto& cell = m.cells[c];
    int shared = 0;
    std::size_t apex = SIZE_MAX;
    for (std::size_t i = 0; i < 3; ++i) {
      if (r.boundary.count({cell[(i + 1) % 3], cell[i]})) {
        ++shared;
        apex = cell[(i + 2) % 3];
      }
    }
    // One shared edge: the opposite vertex must be new, or the region would
    // pinch or enclose a hole. Two shared edges close a notch.
    if (shared == 1) {
      const auto use = r.vertex_use.find(apex);
      if (use != r.vertex_use.end() && use->second > 0) return std::nullopt;
    } else if (shared != 2) {
      return std::nullopt;
    }
    double d2 = r.diameter2;
    for (auto v : cell) {
      if (std::find(r.vertices.begin(), r.vertices.end(), v) != r.vertices.end()) continue;
      for (auto w : r.vertices) d2 = std::max(d2, squared_distance(m.vertices[v], m.vertices[w]));
    }
    if (d2 > bound2) return std::nullopt;
    return d2;
  };

  constexpr std::size_t kFree = SIZE_MAX;
  std::vector<std::size_t> region_of(m.num_cells(), kFree);
  std::vector<Region> regions;
  for (auto start : order) {
    if (region_of[start] != kFree) continue;
    const std::size_t id = regions.size();
    regions.emplace_back();
    Region& r = regions.back();
    add(r, start);
    region_of[start] = id;
    for (;;) {
      // Candidates: free triangles across a boundary edge of the region.
      std::set<std::size_t> candidates;
      for (const auto& [e, c] : r.boundary) {
        const auto it = owner.find({e.second, e.first});
        if (it != owner.end() && region_of[it->second] == kFree && mergeable(it->second)) candidates.insert(it->second);
      }
      std::optional<std::size_t> best;
      double best_d2 = 0.0;
      for (auto c : candidates) {
        const auto d2 = evaluate(r, c);
        if (d2 && (!best || *d2 < best_d2)) {
          best = c;
          best_d2 = *d2;
        }
      }
      if (!best) break;
      add(r, *best);
      region_of[*best] = id;
    }
  }

  // Second pass: a triangle left on its own may still join a neighbouring
  // region under the same rules (smallest resulting diameter, then lowest id).
  for (auto& lone : regions) {
    if (lone.cells.size() != 1) continue;
    const std::size_t c = lone.cells[0];
    std::optional<std::size_t> best;
    double best_d2 = 0.0;
    for (auto nb : neighbours(c)) {
      const std::size_t id = region_of[nb];
      if (id == kFree || id == region_of[c]) continue;
      const auto d2 = evaluate(regions[id], c);
      if (d2 && (!best || *d2 < best_d2 || (*d2 == best_d2 && id < *best))) {
        best = id;
        best_d2 = *d2;
      }
    }
    if (!best) continue;
    add(regions[*best], c);
    region_of[c] = *best;
    lone.cells.clear();
  }

  PolygonalMesh out;
  out.vertices = m.vertices;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    if (mergeable(c)) continue;
    out.cells.push_back(m.cells[c]);
    out.tags.push_back(m.tags[c]);
  }
  for (const auto& r : regions) {
    if (r.cells.empty()) continue;
    if (r.cells.size() == 1) {
      out.cells.push_back(m.cells[r.cells[0]]);
      out.tags.push_back(CellTag::filler_triangle);
      continue;
    }
    std::map<std::size_t, std::size_t> next;
    for (const auto& [e, c] : r.boundary) next[e.first] = e.second;
    // Start at the smallest boundary vertex so the loop is canonical.
    const std::size_t first = next.begin()->first;
    Cell loop{first};
    for (std::size_t v = next.at(first); v != first; v = next.at(v)) {
      loop.push_back(v);
      if (loop.size() > next.size()) throw NumericalError("aggregated region boundary is not a single loop");
    }
    if (loop.size() != next.size()) throw NumericalError("aggregated region boundary is not a single loop");
    out.cells.push_back(std::move(loop));
    out.tags.push_back(CellTag::aggregated);
  }
  compact(out);
  return out;
}

// ---- datasets ----

std::vector<double> family_parameters(int num_meshes) {
  if (num_meshes < 1) throw ValidationError("num_meshes must be at least 1");
  std::vector<double> t(static_cast<std::size_t>(num_meshes), 0.0);
  for (int i = 1; i < num_meshes; ++i) t[i] = static_cast<double>(i) / (num_meshes - 1);
  return t;
}

PolygonalMesh generate_mesh(const GenerationConfig& c, double t) {
  const auto placed = place_all(c, t);
  PolygonalMesh m = triangulate_exterior(placed, c.triangulation);
  if (c.mirror) m = mirror(m);
  if (c.aggregate) m = aggregate(m);
  return m;
}

namespace {

[[noreturn]] void rethrow_with_context(const std::string& ctx) {
  try {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(ctx + e.what(), e.line());
  } catch (const GeometryError& e) {
    throw GeometryError(ctx + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(ctx + e.what());
  } catch (const Error& e) {
    throw Error(ctx + e.what());
  }
}

}  // namespace

Dataset generate_dataset(const GenerationConfig& c, int jobs) {
  validate(c);
  Dataset d;
  d.config = c;
  d.t_values = family_parameters(c.num_meshes);
  d.meshes.resize(d.t_values.size());
  auto build = [&](std::size_t i) {
    try {
      d.meshes[i] = generate_mesh(c, d.t_values[i]);
    } catch (const Error&) {
      rethrow_with_context(fmt::format("mesh {} (t={:.6g}): ", i, d.t_values[i]));
    }
    logger().debug("generated mesh {} at t={:.6g}: {} vertices, {} cells", i, d.t_values[i], d.meshes[i].num_vertices(),
                   d.meshes[i].num_cells());
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < d.meshes.size(); ++i) build(i);
    return d;
  }
  // Bounded pool: members are independent and write disjoint slots. The
  // error of the lowest failing index wins, as in the sequential path.
  std::vector<std::exception_ptr> errors(d.meshes.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(jobs), d.meshes.size());
  for (std::size_t w = 0; w < n; ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < d.meshes.size(); i = next++) {
        try {
          build(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    }));
  }
  for (auto& w : workers) w.get();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return d;
}

}  // namespace pemq
