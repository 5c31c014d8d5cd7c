#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "pemq/meshgen.hpp"
#include "pemq/mesh.hpp"

namespace pemq {

enum class MeshFileFormat { obj, off, stl, node_ele };

/// "obj", "off", "stl", "node-ele".
std::string_view to_string(MeshFileFormat f);
std::optional<MeshFileFormat> parse_mesh_format(std::string_view name);
/// From the extension; `.node` and `.ele` both mean NODE_ELE.
std::optional<MeshFileFormat> format_from_path(const std::filesystem::path& p);
/// ".obj", ".off", ".stl" or ".node".
std::string_view extension(MeshFileFormat f);

// Stream level. Coordinates are written with 17 significant digits, so text
// round-trips are exact. Cell tags travel as `g <tag>` groups in OBJ, a
// trailing `# tags` comment in OFF and an element attribute in .ele; files
// without them get triangles as filler and other cells as seed polygons.
void write_off(std::ostream& os, const PolygonalMesh& m);
void write_obj(std::ostream& os, const PolygonalMesh& m);
/// Throws ValidationError "STL requires triangles" for other cells.
void write_stl(std::ostream& os, const PolygonalMesh& m);
void write_node(std::ostream& os, const PolygonalMesh& m);
void write_ele(std::ostream& os, const PolygonalMesh& m);

// Readers throw ParseError (with line number) for malformed text and
// ValidationError naming the cell for invalid polygons. Cells come back CCW.
PolygonalMesh read_off(std::istream& is);
PolygonalMesh read_obj(std::istream& is);
/// ASCII or binary; coincident corners are merged exactly.
PolygonalMesh read_stl(std::istream& is);
/// Index base follows the first .node index (Triangle writes 1, some tools 0).
PolygonalMesh read_node_ele(std::istream& node, std::istream& ele);

/// NODE_ELE writes `<stem>.node` and `<stem>.ele` next to `path`.
void write_mesh(const PolygonalMesh& m, const std::filesystem::path& path, MeshFileFormat f);
void write_mesh(const PolygonalMesh& m, const std::filesystem::path& path);
PolygonalMesh read_mesh(const std::filesystem::path& path);

/// Placement CSV: `id,source,param,x,y,scale,rotation_deg`. Rows are validated;
/// errors carry the 1-based line number.
std::vector<Placement> read_placements(std::istream& is);
std::vector<Placement> read_placements(const std::filesystem::path& path);
void write_placements(std::ostream& os, const std::vector<Placement>& placements);
void write_placements(const std::filesystem::path& path, const std::vector<Placement>& placements);

}  // namespace pemq
