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

#include "partpose/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace partpose {

namespace {

constexpr int kBins = 16;
constexpr std::uint32_t kLeafSize = 4;
constexpr int kMaxSahDepth = 40;

double half_area(const Aabb& b) {
  if (b.empty()) return 0.0;
  const Vec3 e = b.extent();
  return e.x() * e.y() + e.y() * e.z() + e.z() * e.x();
}

}  // namespace

TriangleBvh::TriangleBvh(const TriMesh& mesh, std::int32_t tag) {
  add(mesh, Rigid::Identity(), tag);
  build();
}

void TriangleBvh::add(const TriMesh& mesh, const Rigid& pose, std::int32_t tag) {
  tris_.reserve(tris_.size() + mesh.faces.size());
  for (const auto& f : mesh.faces) {
    const Vec3 a = pose * mesh.vertices[f[0]];
    const Vec3 b = pose * mesh.vertices[f[1]];
    const Vec3 c = pose * mesh.vertices[f[2]];
    Tri t{a, b - a, c - a, Vec3::Zero(), tag};
    const Vec3 n = t.e1.cross(t.e2);
    const double len = n.norm();
    if (len == 0.0) continue;
    t.normal = n / len;
    tris_.push_back(t);
  }
}

void TriangleBvh::build() {
  nodes_.clear();
  bounds_ = Aabb{};
  if (tris_.empty()) return;
  std::vector<Vec3> centroids(tris_.size());
  std::vector<Aabb> boxes(tris_.size());
  for (std::size_t i = 0; i < tris_.size(); ++i) {
    const auto& t = tris_[i];
    boxes[i].extend(t.v0);
    boxes[i].extend(t.v0 + t.e1);
    boxes[i].extend(t.v0 + t.e2);
    centroids[i] = boxes[i].center();
    bounds_.extend(boxes[i]);
  }
  nodes_.reserve(2 * tris_.size() / kLeafSize + 1);
  build_node(0, static_cast<std::uint32_t>(tris_.size()), centroids, boxes, 0);
}

std::uint32_t TriangleBvh::build_node(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids,
                                      std::vector<Aabb>& boxes, int depth) {
  Aabb box, cbox;
  for (auto i = begin; i < end; ++i) {
    box.extend(boxes[i]);
    cbox.extend(centroids[i]);
  }
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({box.lo, box.hi, begin, end - begin});
  const std::uint32_t n = end - begin;
  if (n <= kLeafSize) return index;

  int axis = 0;
  const Vec3 ext = cbox.extent();
  if (ext.y() > ext[axis]) axis = 1;
  if (ext.z() > ext[axis]) axis = 2;
  if (ext[axis] <= 0.0) return index;

  // Binned SAH along the widest centroid axis.
  std::array<Aabb, kBins> bin_box;
  std::array<std::uint32_t, kBins> bin_count{};
  const double scale = kBins / ext[axis];
  auto bin_of = [&](std::uint32_t i) {
    return std::min(kBins - 1, static_cast<int>((centroids[i][axis] - cbox.lo[axis]) * scale));
  };
  for (auto i = begin; i < end; ++i) {
    const int b = bin_of(i);
    ++bin_count[b];
    bin_box[b].extend(boxes[i]);
  }
  std::array<double, kBins - 1> cost{};
  Aabb acc;
  std::uint32_t cnt = 0;
  for (int b = 0; b < kBins - 1; ++b) {
    acc.extend(bin_box[b]);
    cnt += bin_count[b];
    cost[b] = cnt * half_area(acc);
  }
  acc = Aabb{};
  cnt = 0;
  for (int b = kBins - 1; b > 0; --b) {
    acc.extend(bin_box[b]);
    cnt += bin_count[b];
    cost[b - 1] += cnt * half_area(acc);
  }
  const int split = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());

  std::uint32_t mid = begin;
  if (depth < kMaxSahDepth) {
    for (auto i = begin; i < end; ++i) {
      if (bin_of(i) <= split) {
        std::swap(tris_[i], tris_[mid]);
        std::swap(centroids[i], centroids[mid]);
        std::swap(boxes[i], boxes[mid]);
        ++mid;
      }
    }
  }
  if (mid == begin || mid == end) {
    // Median split keeps the tree depth logarithmic.
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), begin);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return centroids[a][axis] < centroids[b][axis]; });
    std::vector<Tri> t2;
    std::vector<Vec3> c2;
    std::vector<Aabb> b2;
    for (auto i : perm) {
      t2.push_back(tris_[i]);
      c2.push_back(centroids[i]);
      b2.push_back(boxes[i]);
    }
    std::copy(t2.begin(), t2.end(), tris_.begin() + begin);
    std::copy(c2.begin(), c2.end(), centroids.begin() + begin);
    std::copy(b2.begin(), b2.end(), boxes.begin() + begin);
    mid = begin + n / 2;
  }

  nodes_[index].count = 0;
  build_node(begin, mid, centroids, boxes, depth + 1);
  const auto right = build_node(mid, end, centroids, boxes, depth + 1);
  nodes_[index].first = right;
  return index;
}

std::optional<RayHit> TriangleBvh::intersect(const Vec3& origin, const Vec3& dir, double t_min,
                                             double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  Vec3 inv;
  for (int k = 0; k < 3; ++k) inv[k] = dir[k] != 0.0 ? 1.0 / dir[k] : 1e300;

  auto slab = [&](const Node& node, double limit, double& entry) {
    double lo = t_min, hi = limit;
    for (int k = 0; k < 3; ++k) {
      double a = (node.lo[k] - origin[k]) * inv[k];
      double b = (node.hi[k] - origin[k]) * inv[k];
      if (a > b) std::swap(a, b);
      lo = std::max(lo, a);
      hi = std::min(hi, b);
    }
    entry = lo;
    return lo <= hi;
  };

  std::optional<RayHit> best;
  double best_t = t_max;
  std::array<std::uint32_t, 128> stack;
  int top = 0;
  double entry = 0.0;
  if (!slab(nodes_[0], best_t, entry)) return std::nullopt;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.count > 0) {
      for (auto i = node.first; i < node.first + node.count; ++i) {
        // Moller-Trumbore, two-sided.
        const Tri& tri = tris_[i];
        const Vec3 p = dir.cross(tri.e2);
        const double det = tri.e1.dot(p);
        if (det == 0.0) continue;
        const double inv_det = 1.0 / det;
        const Vec3 s = origin - tri.v0;
        const double u = s.dot(p) * inv_det;
        if (u < 0.0 || u > 1.0) continue;
        const Vec3 q = s.cross(tri.e1);
        const double v = dir.dot(q) * inv_det;
        if (v < 0.0 || u + v > 1.0) continue;
        const double t = tri.e2.dot(q) * inv_det;
        if (t < t_min || t > best_t) continue;
        if (best && t == best_t && i > best->triangle) continue;
        best_t = t;
        best = RayHit{t, i, tri.tag, tri.normal};
      }
      continue;
    }
    const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    const std::uint32_t right = node.first;
    double el = 0.0, er = 0.0;
    const bool hl = slab(nodes_[left], best_t, el);
    const bool hr = slab(nodes_[right], best_t, er);
    if (hl && hr) {
      // Push the farther child first so the nearer one is visited next.
      if (el <= er) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    } else if (hl) {
      stack[top++] = left;
    } else if (hr) {
      stack[top++] = right;
    }
  }
  return best;
}

}  // namespace partpose
