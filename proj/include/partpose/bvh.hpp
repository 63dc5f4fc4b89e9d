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

#include <cstdint>
#include <optional>
#include <vector>

#include "partpose/common.hpp"
#include "partpose/mesh.hpp"

namespace partpose {

struct RayHit {
  double t = 0.0;
  std::uint32_t triangle = 0;  // internal (reordered) index
  std::int32_t tag = 0;
  Vec3 normal = Vec3::Zero();  // unit geometric normal of the hit triangle (winding order)
};

/// Bounding-volume hierarchy over triangles (binned SAH build, two-sided
/// closest-hit queries). Immutable after construction; safe for concurrent
/// queries.
class TriangleBvh {
 public:
  TriangleBvh() = default;
  explicit TriangleBvh(const TriMesh& mesh, std::int32_t tag = 0);

  /// Appends a mesh, posed by `pose`, with a per-triangle tag. Call build() after the last add.
  void add(const TriMesh& mesh, const Rigid& pose, std::int32_t tag);
  void build();

  /// Closest intersection with t in [t_min, t_max].
  std::optional<RayHit> intersect(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const;

  std::size_t triangle_count() const { return tris_.size(); }
  const Aabb& bounds() const { return bounds_; }

 private:
  struct Tri {
    Vec3 v0, e1, e2, normal;
    std::int32_t tag;
  };
  struct Node {
    Eigen::Vector3d lo, hi;
    std::uint32_t first;   // leaf: first triangle; inner: right child index
    std::uint32_t count;   // 0 for inner nodes (left child is index + 1)
  };

  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids,
                           std::vector<Aabb>& boxes, int depth);

  std::vector<Tri> tris_;
  std::vector<Node> nodes_;
  Aabb bounds_;
};

}  // namespace partpose
