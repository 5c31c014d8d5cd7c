#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pemq/geometry.hpp"
#include "pemq/mesh.hpp"
#include "pemq/shapes.hpp"
#include "pemq/triangulation.hpp"

namespace pemq {

/// Where a placed polygon comes from. Text form: `parametric:<class>`,
/// `random:<seed>:<n>` or `file:<path>`.
struct PolygonSource {
  enum class Kind { parametric, random, file };

  Kind kind = Kind::parametric;
  ParametricClass cls = ParametricClass::sliver;
  std::uint64_t seed = 0;
  int vertex_count = 0;
  std::string path;

  static PolygonSource parametric(ParametricClass c);
  static PolygonSource random(std::uint64_t seed, int n);
  static PolygonSource file(std::string path);

  /// Throws ValidationError on malformed text.
  static PolygonSource parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const PolygonSource&, const PolygonSource&) = default;
};

struct Placement {
  std::string id;
  PolygonSource source;
  // For parametric sources: pins t for this placement. Unset means the
  // placement follows the family parameter.
  std::optional<double> param;
  Point2 position{0.5, 0.5};
  double scale = 1.0;
  double rotation_deg = 0.0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Throws ValidationError for a non-positive scale, a non-finite value, or a
/// `param` outside [0, 1] or attached to a non-parametric source.
void validate(const Placement& p);

struct GenerationConfig {
  std::vector<Placement> placements;
  int num_meshes = 1;
  RefinementParams triangulation;
  bool mirror = false;
  bool aggregate = false;
  // Relative `file:` paths are resolved against this directory.
  std::filesystem::path base_dir;
};

/// Throws ValidationError. A family of more than one mesh needs at least one
/// parametric placement that follows t.
void validate(const GenerationConfig& c);

struct Dataset {
  GenerationConfig config;
  std::vector<PolygonalMesh> meshes;
  std::vector<double> t_values;
};

inline constexpr double kCanvasMargin = 1e-6;

/// Source polygon in its own frame, instantiated at family parameter t.
Polygon2 source_polygon(const Placement& p, double t, const std::filesystem::path& base_dir = {});

/// Scales by `scale` and rotates by `rotation_deg` about the area centroid,
/// then moves the centroid to `position`. Throws GeometryError "outside
/// canvas" when a vertex leaves [eps, 1 - eps]^2.
Polygon2 place(const Polygon2& p, const Placement& placement);

/// Places every polygon in order. Throws GeometryError naming the placement on
/// "outside canvas" or "overlap" with an earlier one.
std::vector<Polygon2> place_all(const GenerationConfig& c, double t);

/// Reflects across x = 1 and y = 1, welds vertices within 1e-9 and scales the
/// 2x2 tiling back into the unit square. Cell blocks: original, x-mirror,
/// y-mirror, both.
PolygonalMesh mirror(const PolygonalMesh& m);

/// Merges filler triangles into polygonal cells by region growing. A merge is
/// accepted when the region stays a disk and its vertex diameter stays at or
/// below D*, the smallest seed polygon diameter. Seed cells come first and
/// unchanged, then merged cells (tag aggregated) and leftover triangles.
/// Throws ValidationError "diameter bound undefined" without seed polygons.
PolygonalMesh aggregate(const PolygonalMesh& m);

/// Smallest seed polygon diameter, or nullopt when there are none.
std::optional<double> aggregation_bound(const PolygonalMesh& m);

/// t_i = i / (N - 1), or {0} when N = 1.
std::vector<double> family_parameters(int num_meshes);

/// place -> triangulate -> [mirror] -> [aggregate] at parameter t.
PolygonalMesh generate_mesh(const GenerationConfig& c, double t);

/// Builds every member of the family. Errors are rethrown with the mesh index
/// and t prefixed. `jobs` > 1 builds members concurrently.
Dataset generate_dataset(const GenerationConfig& c, int jobs = 1);

}  // namespace pemq
