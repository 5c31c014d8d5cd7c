#include "pemq/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "pemq/error.hpp"
#include "pemq/log.hpp"

namespace pemq {

namespace fs = std::filesystem;

namespace {

constexpr double kMaxZ = 1e-9;

std::string num(double v) { return fmt::format("{:.17g}", v); }

// Line reader that skips blanks and '#' comments and remembers line numbers.
// Comments are handed to an optional sink.
class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  bool next(std::string& line) {
    while (std::getline(is_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      if (line[first] == '#') {
        comments_.emplace_back(line.substr(first + 1), number_);
        continue;
      }
      return true;
    }
    return false;
  }

  std::size_t number() const noexcept { return number_; }
  const std::vector<std::pair<std::string, std::size_t>>& comments() const { return comments_; }

 private:
  std::istream& is_;
  std::size_t number_ = 0;
  std::vector<std::pair<std::string, std::size_t>> comments_;
};

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

double parse_real(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + tok + "'", line);
  }
}

long long parse_int(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
}

void check_z(double z, std::size_t line) {
  if (std::fabs(z) > kMaxZ) throw ParseError("nonzero z coordinate (2D meshes only)", line);
}

CellTag default_tag(const Cell& c) { return c.size() == 3 ? CellTag::filler_triangle : CellTag::seed_polygon; }

int tag_code(CellTag t) {
  switch (t) {
    case CellTag::seed_polygon: return 0;
    case CellTag::filler_triangle: return 1;
    case CellTag::aggregated: return 2;
  }
  return 0;
}

CellTag tag_from_code(long long code, std::size_t line) {
  switch (code) {
    case 0: return CellTag::seed_polygon;
    case 1: return CellTag::filler_triangle;
    case 2: return CellTag::aggregated;
  }
  throw ParseError("unknown cell tag code " + std::to_string(code), line);
}

void finish(PolygonalMesh& m) {
  if (m.tags.empty()) {
    for (const auto& c : m.cells) m.tags.push_back(default_tag(c));
  }
  orient_cells_ccw(m);
  validate(m);
}

void require_valid_for_write(const PolygonalMesh& m) { validate(m); }

}  // namespace

std::string_view to_string(MeshFileFormat f) {
  switch (f) {
    case MeshFileFormat::obj: return "obj";
    case MeshFileFormat::off: return "off";
    case MeshFileFormat::stl: return "stl";
    case MeshFileFormat::node_ele: return "node-ele";
  }
  return "?";
}

std::optional<MeshFileFormat> parse_mesh_format(std::string_view name) {
  for (auto f : {MeshFileFormat::obj, MeshFileFormat::off, MeshFileFormat::stl, MeshFileFormat::node_ele}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

std::optional<MeshFileFormat> format_from_path(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") return MeshFileFormat::obj;
  if (ext == ".off") return MeshFileFormat::off;
  if (ext == ".stl") return MeshFileFormat::stl;
  if (ext == ".node" || ext == ".ele") return MeshFileFormat::node_ele;
  return std::nullopt;
}

std::string_view extension(MeshFileFormat f) {
  switch (f) {
    case MeshFileFormat::obj: return ".obj";
    case MeshFileFormat::off: return ".off";
    case MeshFileFormat::stl: return ".stl";
    case MeshFileFormat::node_ele: return ".node";
  }
  return "";
}

// ---- OFF ----

void write_off(std::ostream& os, const PolygonalMesh& m) {
  require_valid_for_write(m);
  os << "OFF\n" << m.num_vertices() << ' ' << m.num_cells() << " 0\n";
  for (const auto& v : m.vertices) os << num(v.x) << ' ' << num(v.y) << " 0\n";
  for (const auto& c : m.cells) {
    os << c.size();
    for (auto i : c) os << ' ' << i;
    os << '\n';
  }
  os << "# tags";
  for (auto t : m.tags) os << ' ' << to_string(t);
  os << '\n';
}

PolygonalMesh read_off(std::istream& is) {
  LineReader in(is);
  std::string line;
  if (!in.next(line)) throw ParseError("empty OFF file", in.number());
  auto tok = split_ws(line);
  if (tok.empty() || tok[0] != "OFF") throw ParseError("missing OFF header", in.number());
  tok.erase(tok.begin());
  if (tok.empty()) {
    if (!in.next(line)) throw ParseError("missing OFF counts", in.number());
    tok = split_ws(line);
  }
  if (tok.size() < 2) throw ParseError("expected vertex and face counts", in.number());
  const long long nv = parse_int(tok[0], in.number()), nf = parse_int(tok[1], in.number());
  if (nv < 0 || nf < 0) throw ParseError("negative counts", in.number());

  PolygonalMesh m;
  for (long long i = 0; i < nv; ++i) {
    if (!in.next(line)) throw ParseError("unexpected end of file in vertex list", in.number());
    tok = split_ws(line);
    if (tok.size() < 2) throw ParseError("vertex needs at least 2 coordinates", in.number());
    const double x = parse_real(tok[0], in.number()), y = parse_real(tok[1], in.number());
    if (tok.size() >= 3) check_z(parse_real(tok[2], in.number()), in.number());
    m.vertices.push_back({x, y});
  }
  for (long long f = 0; f < nf; ++f) {
    if (!in.next(line)) throw ParseError("unexpected end of file in face list", in.number());
    tok = split_ws(line);
    const long long k = parse_int(tok[0], in.number());
    if (k < 3 || tok.size() < static_cast<std::size_t>(k) + 1) throw ParseError("bad face size", in.number());
    Cell c;
    for (long long j = 1; j <= k; ++j) {
      const long long idx = parse_int(tok[j], in.number());
      if (idx < 0 || idx >= nv) throw ParseError("face index " + std::to_string(idx) + " out of range", in.number());
      c.push_back(static_cast<std::size_t>(idx));
    }
    m.cells.push_back(std::move(c));
  }
  while (in.next(line)) {
    throw ParseError("trailing content after face list", in.number());
  }
  for (const auto& [text, ln] : in.comments()) {
    auto words = split_ws(text);
    if (words.empty() || words[0] != "tags") continue;
    if (words.size() != m.cells.size() + 1) throw ParseError("tag comment does not match the face count", ln);
    try {
      for (std::size_t i = 1; i < words.size(); ++i) m.tags.push_back(parse_cell_tag(words[i]));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), ln);
    }
  }
  finish(m);
  return m;
}

// ---- OBJ ----

void write_obj(std::ostream& os, const PolygonalMesh& m) {
  require_valid_for_write(m);
  for (const auto& v : m.vertices) os << "v " << num(v.x) << ' ' << num(v.y) << " 0\n";
  std::optional<CellTag> group;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    if (group != m.tags[c]) {
      group = m.tags[c];
      os << "g " << to_string(*group) << '\n';
    }
    os << 'f';
    for (auto i : m.cells[c]) os << ' ' << i + 1;
    os << '\n';
  }
}

PolygonalMesh read_obj(std::istream& is) {
  LineReader in(is);
  std::string line;
  PolygonalMesh m;
  std::vector<std::optional<CellTag>> tags;
  std::optional<CellTag> group;
  while (in.next(line)) {
    const auto tok = split_ws(line);
    const auto& kw = tok[0];
    if (kw == "v") {
      if (tok.size() < 3) throw ParseError("vertex needs at least 2 coordinates", in.number());
      const double x = parse_real(tok[1], in.number()), y = parse_real(tok[2], in.number());
      if (tok.size() >= 4) check_z(parse_real(tok[3], in.number()), in.number());
      m.vertices.push_back({x, y});
    } else if (kw == "f") {
      if (tok.size() < 4) throw ParseError("face needs at least 3 vertices", in.number());
      Cell c;
      for (std::size_t j = 1; j < tok.size(); ++j) {
        const std::string ref = tok[j].substr(0, tok[j].find('/'));
        long long idx = parse_int(ref, in.number());
        const auto n = static_cast<long long>(m.vertices.size());
        if (idx < 0) idx = n + idx + 1;
        if (idx < 1 || idx > n) throw ParseError("face index " + ref + " out of range", in.number());
        c.push_back(static_cast<std::size_t>(idx - 1));
      }
      m.cells.push_back(std::move(c));
      tags.push_back(group);
    } else if (kw == "g") {
      group.reset();
      if (tok.size() >= 2) {
        try {
          group = parse_cell_tag(tok[1]);
        } catch (const ValidationError&) {
          // foreign group names carry no tag
        }
      }
    } else if (kw == "vt" || kw == "vn" || kw == "o" || kw == "s" || kw == "usemtl" || kw == "mtllib" || kw == "l") {
      continue;
    } else {
      throw ParseError("unsupported OBJ statement '" + kw + "'", in.number());
    }
  }
  for (std::size_t c = 0; c < m.cells.size(); ++c) m.tags.push_back(tags[c].value_or(default_tag(m.cells[c])));
  finish(m);
  return m;
}

// ---- STL ----

void write_stl(std::ostream& os, const PolygonalMesh& m) {
  require_valid_for_write(m);
  for (const auto& c : m.cells) {
    if (c.size() != 3) throw ValidationError("STL requires triangles");
  }
  os << "solid mesh\n";
  for (const auto& c : m.cells) {
    os << "  facet normal 0 0 1\n    outer loop\n";
    for (auto i : c) os << "      vertex " << num(m.vertices[i].x) << ' ' << num(m.vertices[i].y) << " 0\n";
    os << "    endloop\n  endfacet\n";
  }
  os << "endsolid mesh\n";
}

namespace {

struct StlBuilder {
  PolygonalMesh m;
  std::map<std::pair<double, double>, std::size_t> index;

  std::size_t vertex(double x, double y) {
    const auto [it, fresh] = index.try_emplace({x, y}, m.vertices.size());
    if (fresh) m.vertices.push_back({x, y});
    return it->second;
  }
};

PolygonalMesh read_stl_binary(const std::string& data) {
  std::uint32_t n = 0;
  std::memcpy(&n, data.data() + 80, 4);
  StlBuilder b;
  for (std::uint32_t f = 0; f < n; ++f) {
    const char* rec = data.data() + 84 + 50 * static_cast<std::size_t>(f);
    std::array<float, 12> v{};
    std::memcpy(v.data(), rec, sizeof(v));
    Cell c;
    for (int k = 0; k < 3; ++k) {
      const double x = v[3 + 3 * k], y = v[4 + 3 * k], z = v[5 + 3 * k];
      if (!std::isfinite(x) || !std::isfinite(y)) throw ParseError("non-finite coordinate in facet " + std::to_string(f), 0);
      if (std::fabs(z) > kMaxZ) throw ParseError("nonzero z coordinate in facet " + std::to_string(f), 0);
      c.push_back(b.vertex(x, y));
    }
    b.m.cells.push_back(std::move(c));
  }
  return std::move(b.m);
}

PolygonalMesh read_stl_ascii(const std::string& data) {
  std::istringstream is(data);
  LineReader in(is);
  std::string line;
  StlBuilder b;
  Cell current;
  bool in_solid = false, ended = false;
  while (in.next(line)) {
    const auto tok = split_ws(line);
    const auto& kw = tok[0];
    if (kw == "solid") {
      in_solid = true;
    } else if (kw == "endsolid") {
      ended = true;
    } else if (!in_solid || ended) {
      throw ParseError("content outside solid block", in.number());
    } else if (kw == "facet" || kw == "outer") {
      continue;
    } else if (kw == "vertex") {
      if (tok.size() != 4) throw ParseError("vertex needs 3 coordinates", in.number());
      const double x = parse_real(tok[1], in.number()), y = parse_real(tok[2], in.number());
      check_z(parse_real(tok[3], in.number()), in.number());
      current.push_back(b.vertex(x, y));
    } else if (kw == "endloop") {
      if (current.size() != 3) throw ParseError("STL facets must be triangles", in.number());
      b.m.cells.push_back(std::move(current));
      current.clear();
    } else if (kw == "endfacet") {
      continue;
    } else {
      throw ParseError("unsupported STL statement '" + kw + "'", in.number());
    }
  }
  if (!in_solid || !ended) throw ParseError("unterminated solid", in.number());
  return std::move(b.m);
}

}  // namespace

PolygonalMesh read_stl(std::istream& is) {
  std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  PolygonalMesh m;
  bool binary = false;
  if (data.size() >= 84) {
    std::uint32_t n = 0;
    std::memcpy(&n, data.data() + 80, 4);
    binary = data.size() == 84 + 50 * static_cast<std::size_t>(n);
  }
  m = binary ? read_stl_binary(data) : read_stl_ascii(data);
  finish(m);
  return m;
}

// ---- NODE/ELE ----

void write_node(std::ostream& os, const PolygonalMesh& m) {
  os << m.num_vertices() << " 2 0 1\n";
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    const auto& v = m.vertices[i];
    os << i + 1 << ' ' << num(v.x) << ' ' << num(v.y) << ' ' << (on_canvas_boundary(v) ? 1 : 0) << '\n';
  }
}

void write_ele(std::ostream& os, const PolygonalMesh& m) {
  require_valid_for_write(m);
  // Triangle's header is "<count> <nodes per element> <attributes>"; 0 marks
  // a variable vertex count given per line.
  os << m.num_cells() << " 0 1\n";
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    os << c + 1 << ' ' << m.cells[c].size();
    for (auto i : m.cells[c]) os << ' ' << i + 1;
    os << ' ' << tag_code(m.tags[c]) << '\n';
  }
}

PolygonalMesh read_node_ele(std::istream& node, std::istream& ele) {
  PolygonalMesh m;
  LineReader nin(node);
  std::string line;
  if (!nin.next(line)) throw ParseError(".node: missing header", nin.number());
  auto tok = split_ws(line);
  if (tok.size() < 2) throw ParseError(".node: header needs vertex count and dimension", nin.number());
  const long long nv = parse_int(tok[0], nin.number());
  const long long dim = parse_int(tok[1], nin.number());
  const long long nattr = tok.size() > 2 ? parse_int(tok[2], nin.number()) : 0;
  const long long nmark = tok.size() > 3 ? parse_int(tok[3], nin.number()) : 0;
  if (nv < 0 || dim != 2 || nattr < 0 || nmark < 0 || nmark > 1) throw ParseError(".node: bad header", nin.number());
  long long base = 1;
  for (long long i = 0; i < nv; ++i) {
    if (!nin.next(line)) throw ParseError(".node: unexpected end of file", nin.number());
    tok = split_ws(line);
    if (static_cast<long long>(tok.size()) != 3 + nattr + nmark) throw ParseError(".node: wrong field count", nin.number());
    const long long idx = parse_int(tok[0], nin.number());
    if (i == 0) {
      if (idx != 0 && idx != 1) throw ParseError(".node: first index must be 0 or 1", nin.number());
      base = idx;
    }
    if (idx != base + i) throw ParseError(".node: indices must be consecutive", nin.number());
    m.vertices.push_back({parse_real(tok[1], nin.number()), parse_real(tok[2], nin.number())});
  }
  if (nin.next(line)) throw ParseError(".node: trailing content", nin.number());

  LineReader ein(ele);
  if (!ein.next(line)) throw ParseError(".ele: missing header", ein.number());
  tok = split_ws(line);
  if (tok.size() < 2) throw ParseError(".ele: header needs element count and nodes per element", ein.number());
  const long long ne = parse_int(tok[0], ein.number());
  const long long per = parse_int(tok[1], ein.number());
  const long long eattr = tok.size() > 2 ? parse_int(tok[2], ein.number()) : 0;
  if (ne < 0 || eattr < 0 || (per != 0 && per < 3)) throw ParseError(".ele: bad header", ein.number());
  bool have_tags = eattr >= 1;
  for (long long e = 0; e < ne; ++e) {
    if (!ein.next(line)) throw ParseError(".ele: unexpected end of file", ein.number());
    tok = split_ws(line);
    std::size_t pos = 1;
    long long k = per;
    if (per == 0) {
      if (tok.size() < 2) throw ParseError(".ele: missing vertex count", ein.number());
      k = parse_int(tok[1], ein.number());
      pos = 2;
      if (k < 3) throw ParseError(".ele: element needs at least 3 vertices", ein.number());
    }
    if (static_cast<long long>(tok.size()) != static_cast<long long>(pos) + k + eattr) {
      throw ParseError(".ele: wrong field count", ein.number());
    }
    Cell c;
    for (long long j = 0; j < k; ++j) {
      const long long idx = parse_int(tok[pos + j], ein.number()) - base;
      if (idx < 0 || idx >= nv) throw ParseError(".ele: node index out of range", ein.number());
      c.push_back(static_cast<std::size_t>(idx));
    }
    if (have_tags) {
      const double code = parse_real(tok[pos + k], ein.number());
      m.tags.push_back(tag_from_code(static_cast<long long>(code), ein.number()));
    }
    m.cells.push_back(std::move(c));
  }
  if (ein.next(line)) throw ParseError(".ele: trailing content", ein.number());
  finish(m);
  return m;
}

// ---- files ----

namespace {

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(p, mode);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  return os;
}

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  std::ifstream is(p, mode);
  if (!is) throw Error("cannot read '" + p.string() + "'");
  return is;
}

template <class F>
auto with_file_context(const fs::path& p, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(p.filename().string() + ": " + e.what(), 0);
  } catch (const ValidationError& e) {
    throw ValidationError(p.filename().string() + ": " + e.what());
  }
}

}  // namespace

void write_mesh(const PolygonalMesh& m, const fs::path& path, MeshFileFormat f) {
  if (f == MeshFileFormat::node_ele) {
    auto stem = path;
    stem.replace_extension();
    auto node = open_out(fs::path(stem).concat(".node"));
    auto ele = open_out(fs::path(stem).concat(".ele"));
    write_node(node, m);
    write_ele(ele, m);
    if (!node || !ele) throw Error("write failed for '" + stem.string() + "'");
    return;
  }
  auto os = open_out(path, std::ios::out | std::ios::binary);
  switch (f) {
    case MeshFileFormat::obj: write_obj(os, m); break;
    case MeshFileFormat::off: write_off(os, m); break;
    case MeshFileFormat::stl: write_stl(os, m); break;
    case MeshFileFormat::node_ele: break;
  }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

void write_mesh(const PolygonalMesh& m, const fs::path& path) {
  const auto f = format_from_path(path);
  if (!f) throw ValidationError("unknown mesh format for '" + path.string() + "'");
  write_mesh(m, path, *f);
}

PolygonalMesh read_mesh(const fs::path& path) {
  const auto f = format_from_path(path);
  if (!f) throw ValidationError("unknown mesh format for '" + path.string() + "'");
  return with_file_context(path, [&] {
    switch (*f) {
      case MeshFileFormat::obj: {
        auto is = open_in(path);
        return read_obj(is);
      }
      case MeshFileFormat::off: {
        auto is = open_in(path);
        return read_off(is);
      }
      case MeshFileFormat::stl: {
        auto is = open_in(path, std::ios::in | std::ios::binary);
        return read_stl(is);
      }
      case MeshFileFormat::node_ele: break;
    }
    auto stem = path;
    stem.replace_extension();
    auto node = open_in(fs::path(stem).concat(".node"));
    auto ele = open_in(fs::path(stem).concat(".ele"));
    return read_node_ele(node, ele);
  });
}

// ---- placements ----

namespace {

constexpr std::string_view kPlacementHeader = "id,source,param,x,y,scale,rotation_deg";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<Placement> read_placements(std::istream& is) {
  std::string line;
  std::size_t number = 0;
  std::vector<Placement> out;
  bool header = false;
  while (std::getline(is, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      if (line != kPlacementHeader) throw ParseError("expected header '" + std::string(kPlacementHeader) + "'", number);
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 7) throw ParseError("expected 7 fields, got " + std::to_string(f.size()), number);
    try {
      Placement p;
      p.id = f[0];
      if (p.id.empty()) throw ValidationError("empty id");
      p.source = PolygonSource::parse(f[1]);
      if (!f[2].empty()) p.param = parse_real(f[2], number);
      p.position = {parse_real(f[3], number), parse_real(f[4], number)};
      p.scale = parse_real(f[5], number);
      p.rotation_deg = parse_real(f[6], number);
      validate(p);
      for (const auto& q : out) {
        if (q.id == p.id) throw ValidationError("duplicate id '" + p.id + "'");
      }
      out.push_back(std::move(p));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), number);
    }
  }
  if (!header) throw ParseError("missing header", number);
  return out;
}

std::vector<Placement> read_placements(const fs::path& path) {
  auto is = open_in(path);
  try {
    return read_placements(is);
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), 0);
  }
}

void write_placements(std::ostream& os, const std::vector<Placement>& placements) {
  os << kPlacementHeader << '\n';
  for (const auto& p : placements) {
    validate(p);
    const auto src = p.source.to_string();
    if (p.id.find_first_of(",\n\r") != std::string::npos || src.find_first_of(",\n\r") != std::string::npos) {
      throw ValidationError("placement '" + p.id + "': commas and newlines cannot be stored in CSV fields");
    }
    os << p.id << ',' << src << ',' << (p.param ? num(*p.param) : "") << ',' << num(p.position.x) << ','
       << num(p.position.y) << ',' << num(p.scale) << ',' << num(p.rotation_deg) << '\n';
  }
}

void write_placements(const fs::path& path, const std::vector<Placement>& placements) {
  auto os = open_out(path);
  write_placements(os, placements);
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace pemq
