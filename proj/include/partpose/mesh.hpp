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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "partpose/common.hpp"

namespace partpose {

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (lo.array() > hi.array()).any(); }
  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
};

using Face = std::array<std::uint32_t, 3>;

/// Triangle mesh in meters. `normals` holds one unit normal per vertex.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec3> normals;

  bool empty() const { return vertices.empty() || faces.empty(); }
  double surface_area() const;
  double face_area(std::size_t f) const;
  /// Unit geometric normal from counter-clockwise winding; zero for degenerate faces.
  Vec3 face_normal(std::size_t f) const;
  Aabb bounds() const;

  /// Area-weighted vertex normals from face winding.
  void compute_vertex_normals();
  /// Throws ValidationError on out-of-range indices or mismatched normal count.
  void validate() const;

  TriMesh transformed(const Rigid& pose) const;
  bool operator==(const TriMesh&) const = default;
};

/// Concatenates meshes and merges vertices closer than `tolerance`.
/// Faces that collapse (repeated index or exactly zero area) are dropped.
TriMesh weld(const std::vector<TriMesh>& meshes, double tolerance);

// OBJ and binary PLY interchange. The format is picked from the extension.
TriMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriMesh& mesh);

TriMesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const TriMesh& mesh);
TriMesh read_ply(const std::filesystem::path& path);
/// Binary little-endian PLY with double-precision vertices and normals.
void write_ply(const std::filesystem::path& path, const TriMesh& mesh);

}  // namespace partpose
