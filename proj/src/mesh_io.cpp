// Copyright 2026 The PartPose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "partpose/mesh.hpp"
#include "partpose/ply.hpp"

namespace partpose {

double TriMesh::face_area(std::size_t f) const {
  const auto& t = faces[f];
  return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

double TriMesh::surface_area() const {
  double area = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) area += face_area(f);
  return area;
}

Vec3 TriMesh::face_normal(std::size_t f) const {
  const auto& t = faces[f];
  const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

Aabb TriMesh::bounds() const {
  Aabb box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

void TriMesh::compute_vertex_normals() {
  normals.assign(vertices.size(), Vec3::Zero());
  for (const auto& t : faces) {
    // Unnormalized cross product weights by twice the area.
    const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    for (auto i : t) normals[i] += n;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::UnitZ();
  }
}

void TriMesh::validate() const {
  const auto n = vertices.size();
  for (const auto& t : faces)
    for (auto i : t)
      if (i >= n) throw ValidationError("face index " + std::to_string(i) + " out of range");
  if (normals.size() != vertices.size())
    throw ValidationError("normal count does not match vertex count");
}

TriMesh TriMesh::transformed(const Rigid& pose) const {
  TriMesh out;
  out.faces = faces;
  out.vertices.reserve(vertices.size());
  out.normals.reserve(normals.size());
  for (const auto& v : vertices) out.vertices.push_back(pose * v);
  for (const auto& n : normals) out.normals.push_back(pose.linear() * n);
  return out;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

Vec3 unit_or_keep(const Vec3& n) {
  const double len = n.norm();
  if (len == 0.0) return Vec3::UnitZ();
  return std::abs(len - 1.0) > 1e-12 ? Vec3(n / len) : n;
}

}  // namespace

TriMesh weld(const std::vector<TriMesh>& meshes, double tolerance) {
  TriMesh out;
  const double cell = tolerance > 0.0 ? tolerance : 1.0;
  const double tol2 = tolerance * tolerance;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> grid;
  std::vector<Vec3> normal_sum;
  std::vector<std::uint32_t> members;

  auto key_of = [cell](const Vec3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / cell)),
                   static_cast<std::int64_t>(std::floor(p.y() / cell)),
                   static_cast<std::int64_t>(std::floor(p.z() / cell))};
  };

  for (const auto& mesh : meshes) {
    std::vector<std::uint32_t> remap(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      const Vec3& p = mesh.vertices[i];
      const CellKey key = key_of(p);
      std::int64_t found = -1;
      for (std::int64_t dx = -1; dx <= 1 && found < 0; ++dx)
        for (std::int64_t dy = -1; dy <= 1 && found < 0; ++dy)
          for (std::int64_t dz = -1; dz <= 1 && found < 0; ++dz) {
            auto it = grid.find({key.x + dx, key.y + dy, key.z + dz});
            if (it == grid.end()) continue;
            for (auto rep : it->second) {
              if ((out.vertices[rep] - p).squaredNorm() <= tol2) {
                found = rep;
                break;
              }
            }
          }
      const Vec3 n = i < mesh.normals.size() ? mesh.normals[i] : Vec3::Zero();
      if (found >= 0) {
        remap[i] = static_cast<std::uint32_t>(found);
        normal_sum[found] += n;
        ++members[found];
      } else {
        const auto idx = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.push_back(p);
        normal_sum.push_back(n);
        members.push_back(1);
        grid[key].push_back(idx);
        remap[i] = idx;
      }
    }
    for (const auto& t : mesh.faces) {
      const Face f{remap[t[0]], remap[t[1]], remap[t[2]]};
      if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
      const Vec3 c = (out.vertices[f[1]] - out.vertices[f[0]]).cross(out.vertices[f[2]] - out.vertices[f[0]]);
      if (c.squaredNorm() == 0.0) continue;
      out.faces.push_back(f);
    }
  }
  out.normals.resize(out.vertices.size());
  for (std::size_t i = 0; i < out.vertices.size(); ++i)
    out.normals[i] = members[i] == 1 ? unit_or_keep(normal_sum[i]) : unit_or_keep(normal_sum[i].normalized());
  return out;
}

// ---------------------------------------------------------------------------
// OBJ

TriMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path.string());
  std::vector<Vec3> normals_in;
  std::vector<Vec3> accum;
  std::vector<std::int64_t> first_normal;
  std::vector<bool> mixed;
  TriMesh mesh;
  bool any_normals = false;
  std::string line;
  std::size_t lineno = 0;

  auto parse_index = [&](const std::string& tok, std::size_t count) -> std::int64_t {
    if (tok.empty()) return -1;
    long long v = 0;
    try {
      v = std::stoll(tok);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad index '" + tok + "'");
    }
    if (v < 0) v = static_cast<long long>(count) + v + 1;
    if (v < 1 || static_cast<std::size_t>(v) > count)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": index out of range");
    return v - 1;
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z()))
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad vertex");
      mesh.vertices.push_back(p);
    } else if (tag == "vn") {
      Vec3 n;
      if (!(ss >> n.x() >> n.y() >> n.z()))
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad normal");
      normals_in.push_back(n);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (ss >> tok) {
        const auto s1 = tok.find('/');
        const std::string vi = tok.substr(0, s1);
        poly.push_back(static_cast<std::uint32_t>(parse_index(vi, mesh.vertices.size())));
        if (s1 != std::string::npos) {
          const auto s2 = tok.find('/', s1 + 1);
          if (s2 != std::string::npos) {
            const auto ni = parse_index(tok.substr(s2 + 1), normals_in.size());
            if (ni >= 0) {
              any_normals = true;
              accum.resize(mesh.vertices.size(), Vec3::Zero());
              first_normal.resize(mesh.vertices.size(), -1);
              mixed.resize(mesh.vertices.size(), false);
              const auto v = poly.back();
              if (first_normal[v] < 0) first_normal[v] = ni;
              else if (first_normal[v] != ni) mixed[v] = true;
              accum[v] += normals_in[ni];
            }
          }
        }
      }
      if (poly.size() < 3)
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  if (any_normals) {
    accum.resize(mesh.vertices.size(), Vec3::Zero());
    first_normal.resize(mesh.vertices.size(), -1);
    mixed.resize(mesh.vertices.size(), false);
    mesh.compute_vertex_normals();
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      if (first_normal[i] < 0) continue;
      mesh.normals[i] = mixed[i] ? unit_or_keep(accum[i].normalized()) : unit_or_keep(normals_in[first_normal[i]]);
    }
  } else {
    mesh.compute_vertex_normals();
  }
  return mesh;
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file: " + path.string());
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& n : mesh.normals) out << "vn " << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
  const bool with_normals = mesh.normals.size() == mesh.vertices.size();
  for (const auto& t : mesh.faces) {
    out << 'f';
    for (auto i : t) {
      out << ' ' << i + 1;
      if (with_normals) out << "//" << i + 1;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing mesh file: " + path.string());
}

// ---------------------------------------------------------------------------
// PLY

namespace ply {

const std::vector<double>& Element::column(const std::string& prop) const {
  auto it = scalars.find(prop);
  if (it == scalars.end()) throw ParseError("PLY element '" + name + "' lacks property '" + prop + "'");
  return it->second;
}

const Element* Data::find(const std::string& n) const {
  for (const auto& e : elements)
    if (e.name == n) return &e;
  return nullptr;
}

namespace {

enum class Type { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

Type parse_type(const std::string& s) {
  if (s == "char" || s == "int8") return Type::kI8;
  if (s == "uchar" || s == "uint8") return Type::kU8;
  if (s == "short" || s == "int16") return Type::kI16;
  if (s == "ushort" || s == "uint16") return Type::kU16;
  if (s == "int" || s == "int32") return Type::kI32;
  if (s == "uint" || s == "uint32") return Type::kU32;
  if (s == "float" || s == "float32") return Type::kF32;
  if (s == "double" || s == "float64") return Type::kF64;
  throw ParseError("unknown PLY type '" + s + "'");
}

std::size_t type_size(Type t) {
  switch (t) {
    case Type::kI8:
    case Type::kU8: return 1;
    case Type::kI16:
    case Type::kU16: return 2;
    case Type::kI32:
    case Type::kU32:
    case Type::kF32: return 4;
    case Type::kF64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Type type = Type::kF32;
  bool is_list = false;
  Type count_type = Type::kU8;
};

struct ElementDecl {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
};

class Cursor {
 public:
  Cursor(const std::vector<char>& buf, std::size_t pos, bool big_endian, std::string file)
      : buf_(buf), pos_(pos), swap_(big_endian != (std::endian::native == std::endian::big)), file_(std::move(file)) {}

  double read(Type t) {
    const std::size_t n = type_size(t);
    if (pos_ + n > buf_.size()) throw ParseError("truncated PLY body: " + file_);
    unsigned char raw[8];
    std::memcpy(raw, buf_.data() + pos_, n);
    pos_ += n;
    if (swap_) std::reverse(raw, raw + n);
    switch (t) {
      case Type::kI8: { std::int8_t v; std::memcpy(&v, raw, 1); return v; }
      case Type::kU8: { std::uint8_t v; std::memcpy(&v, raw, 1); return v; }
      case Type::kI16: { std::int16_t v; std::memcpy(&v, raw, 2); return v; }
      case Type::kU16: { std::uint16_t v; std::memcpy(&v, raw, 2); return v; }
      case Type::kI32: { std::int32_t v; std::memcpy(&v, raw, 4); return v; }
      case Type::kU32: { std::uint32_t v; std::memcpy(&v, raw, 4); return v; }
      case Type::kF32: { float v; std::memcpy(&v, raw, 4); return v; }
      case Type::kF64: { double v; std::memcpy(&v, raw, 8); return v; }
    }
    return 0.0;
  }

 private:
  const std::vector<char>& buf_;
  std::size_t pos_;
  bool swap_;
  std::string file_;
};

}  // namespace

Data read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PLY file: " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const auto start = pos;
    while (pos < buf.size() && buf[pos] != '\n') ++pos;
    if (pos >= buf.size()) throw ParseError("unterminated PLY header: " + path.string());
    std::string line(buf.data() + start, pos - start);
    ++pos;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw ParseError("not a PLY file: " + path.string());
  bool big_endian = false;
  std::vector<ElementDecl> decls;
  for (;;) {
    const std::string line = next_line();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "end_header") break;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "binary_little_endian") big_endian = false;
      else if (fmt == "binary_big_endian") big_endian = true;
      else throw ParseError("unsupported PLY format '" + fmt + "' in " + path.string());
    } else if (tag == "element") {
      ElementDecl d;
      if (!(ss >> d.name >> d.count)) throw ParseError("bad PLY element line in " + path.string());
      decls.push_back(std::move(d));
    } else if (tag == "property") {
      if (decls.empty()) throw ParseError("PLY property before element in " + path.string());
      Property p;
      std::string type;
      ss >> type;
      if (type == "list") {
        std::string ct, it;
        ss >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_type(ct);
        p.type = parse_type(it);
      } else {
        p.type = parse_type(type);
        ss >> p.name;
      }
      if (p.name.empty()) throw ParseError("unnamed PLY property in " + path.string());
      decls.back().props.push_back(p);
    }
  }

  Data data;
  Cursor cur(buf, pos, big_endian, path.string());
  for (const auto& d : decls) {
    Element e;
    e.name = d.name;
    e.count = d.count;
    for (const auto& p : d.props) {
      if (p.is_list) e.lists[p.name].reserve(d.count);
      else e.scalars[p.name].reserve(d.count);
    }
    for (std::size_t r = 0; r < d.count; ++r) {
      for (const auto& p : d.props) {
        if (p.is_list) {
          const auto n = static_cast<std::size_t>(cur.read(p.count_type));
          std::vector<std::int64_t> items(n);
          for (auto& v : items) v = static_cast<std::int64_t>(cur.read(p.type));
          e.lists[p.name].push_back(std::move(items));
        } else {
          e.scalars[p.name].push_back(cur.read(p.type));
        }
      }
    }
    data.elements.push_back(std::move(e));
  }
  return data;
}

}  // namespace ply

TriMesh read_ply(const std::filesystem::path& path) {
  const ply::Data data = ply::read(path);
  const ply::Element* vert = data.find("vertex");
  if (!vert) throw ParseError("PLY has no vertex element: " + path.string());
  TriMesh mesh;
  const auto& xs = vert->column("x");
  const auto& ys = vert->column("y");
  const auto& zs = vert->column("z");
  for (std::size_t i = 0; i < vert->count; ++i) mesh.vertices.emplace_back(xs[i], ys[i], zs[i]);
  if (const ply::Element* face = data.find("face")) {
    auto it = face->lists.find("vertex_indices");
    if (it == face->lists.end()) it = face->lists.find("vertex_index");
    if (it == face->lists.end()) throw ParseError("PLY face element lacks vertex_indices: " + path.string());
    for (const auto& poly : it->second) {
      if (poly.size() < 3) throw ParseError("PLY face with fewer than 3 vertices: " + path.string());
      for (auto v : poly)
        if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size())
          throw ParseError("PLY face index out of range: " + path.string());
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.faces.push_back({static_cast<std::uint32_t>(poly[0]), static_cast<std::uint32_t>(poly[k]),
                              static_cast<std::uint32_t>(poly[k + 1])});
    }
  }
  if (vert->has("nx") && vert->has("ny") && vert->has("nz")) {
    const auto& nx = vert->column("nx");
    const auto& ny = vert->column("ny");
    const auto& nz = vert->column("nz");
    for (std::size_t i = 0; i < vert->count; ++i) mesh.normals.push_back(unit_or_keep(Vec3(nx[i], ny[i], nz[i])));
  } else {
    mesh.compute_vertex_normals();
  }
  return mesh;
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

void write_ply(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write mesh file: " + path.string());
  const bool with_normals = mesh.normals.size() == mesh.vertices.size();
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (with_normals) out << "property double nx\nproperty double ny\nproperty double nz\n";
  out << "element face " << mesh.faces.size() << "\n"
      << "property list uchar uint vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (int k = 0; k < 3; ++k) put(out, mesh.vertices[i][k]);
    if (with_normals)
      for (int k = 0; k < 3; ++k) put(out, mesh.normals[i][k]);
  }
  for (const auto& t : mesh.faces) {
    put<std::uint8_t>(out, 3);
    for (auto i : t) put<std::uint32_t>(out, i);
  }
  if (!out) throw IoError("failed writing mesh file: " + path.string());
}

namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace

TriMesh read_mesh(const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  if (!std::filesystem::exists(path)) throw ValidationError("missing mesh file: " + path.string());
  if (ext == ".obj") return read_obj(path);
  if (ext == ".ply") return read_ply(path);
  throw ParseError("unsupported mesh format: " + path.string());
}

void write_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
  const auto ext = lower_ext(path);
  if (ext == ".obj") return write_obj(path, mesh);
  if (ext == ".ply") return write_ply(path, mesh);
  throw ValidationError("unsupported mesh format: " + path.string());
}

}  // namespace partpose
