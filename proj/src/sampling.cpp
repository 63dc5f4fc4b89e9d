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

#include "partpose/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "partpose/seed.hpp"

namespace partpose {

void SamplingConfig::validate() const {
  if (n < 1 || views < 1 || angles < 1 || depths < 1) throw ValidationError("N, V, A and D must all be at least 1");
  if (depths > 255) throw ValidationError("D must fit in one byte");
  if (angles > 65535) throw ValidationError("A too large");
  if (depth_values.size() != depths)
    throw ValidationError("expected " + std::to_string(depths) + " depth values, got " +
                          std::to_string(depth_values.size()));
  for (std::size_t i = 0; i < depth_values.size(); ++i) {
    if (!(depth_values[i] > 0.0)) throw ValidationError("depth values must be positive");
    if (i > 0 && !(depth_values[i] > depth_values[i - 1]))
      throw ValidationError("depth values must be strictly increasing");
  }
}

void GripperModel::validate() const {
  if (!(max_width > 0 && finger_length > 0 && finger_thickness > 0 && finger_height > 0 && palm_depth > 0))
    throw ValidationError("gripper dimensions must be positive");
  if (!(max_width > 2.0 * finger_thickness)) throw ValidationError("gripper max width must exceed two finger thicknesses");
}

namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

}  // namespace

std::vector<std::size_t> farthest_point_sample(std::span<const Vec3> points, std::size_t n, std::size_t start) {
  if (points.empty()) throw ValidationError("farthest point sampling on an empty point set");
  if (n < 1) throw ValidationError("farthest point sampling needs n >= 1");
  if (start >= points.size()) throw ValidationError("start index out of range");
  n = std::min(n, points.size());
  std::vector<std::size_t> chosen{start};
  chosen.reserve(n);
  std::vector<double> dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) dist[i] = (points[i] - points[start]).squaredNorm();
  while (chosen.size() < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (dist[i] > dist[best] || (dist[i] == dist[best] && lex_less(points[i], points[best]))) best = i;
    }
    chosen.push_back(best);
    const Vec3 p = points[best];
    for (std::size_t i = 0; i < points.size(); ++i) dist[i] = std::min(dist[i], (points[i] - p).squaredNorm());
  }
  return chosen;
}

std::vector<SurfacePoint> sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (mesh.empty()) throw ValidationError("surface sampling on an empty mesh");
  std::vector<double> cdf(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(f);
    cdf[f] = total;
  }
  if (!(total > 0.0)) throw ValidationError("surface sampling on a mesh with zero area");
  Rng rng(seed);
  std::vector<SurfacePoint> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double r = rng.uniform() * total;
    const auto f = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), r) - cdf.begin(), cdf.size() - 1);
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const auto& t = mesh.faces[f];
    const Vec3 p = (1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                   r1 * r2 * mesh.vertices[t[2]];
    out.push_back({p, mesh.face_normal(f)});
  }
  return out;
}

std::vector<SurfacePoint> farthest_point_sample(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw ValidationError("farthest point sampling on an empty mesh");
  if (n < 1) throw ValidationError("farthest point sampling needs n >= 1");
  std::vector<SurfacePoint> pool;
  std::map<std::array<double, 3>, bool> seen;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    if (seen.emplace(std::array<double, 3>{v.x(), v.y(), v.z()}, true).second)
      pool.push_back({v, i < mesh.normals.size() ? mesh.normals[i] : Vec3::UnitZ()});
  }
  if (pool.size() < n) pool = sample_surface(mesh, 16 * n, mix64(seed));
  std::vector<Vec3> positions;
  positions.reserve(pool.size());
  for (const auto& p : pool) positions.push_back(p.position);
  Rng rng(seed);
  const auto idx = farthest_point_sample(positions, n, static_cast<std::size_t>(rng.below(positions.size())));
  std::vector<SurfacePoint> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(pool[i]);
  return out;
}

std::vector<Vec3> sample_view_directions(std::uint32_t v) {
  if (v == 0) return {};
  if (v == 1) return {Vec3::UnitZ()};
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> out;
  out.reserve(v);
  for (std::uint32_t i = 0; i < v; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / v;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

Mat3 approach_frame(const Vec3& approach, double angle) {
  const Vec3 x = approach.normalized();
  Vec3 y(-x.y(), x.x(), 0.0);
  if (y.norm() < 1e-12) y = Vec3::UnitY();
  y.normalize();
  const Vec3 z = x.cross(y);
  Mat3 base;
  base << x, y, z;
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 spin;
  spin << 1, 0, 0, 0, c, -s, 0, s, c;
  return base * spin;
}

std::vector<PoseCandidate> generate_pose_grid(const SurfacePoint& point, std::uint32_t point_index,
                                              const SamplingConfig& config, const GripperModel& gripper) {
  const auto views = sample_view_directions(config.views);
  return generate_pose_grid(point, point_index, views, config, gripper);
}

std::vector<PoseCandidate> generate_pose_grid(const SurfacePoint& point, std::uint32_t point_index,
                                              std::span<const Vec3> views, const SamplingConfig& config,
                                              const GripperModel& gripper) {
  std::vector<PoseCandidate> out;
  out.reserve(views.size() * config.poses_per_view());
  for (std::uint32_t j = 0; j < views.size(); ++j) {
    const Vec3& a = views[j];
    for (std::uint32_t k = 0; k < config.angles; ++k) {
      const Mat3 r = approach_frame(a, kPi * k / config.angles);
      const Quat q = Quat(r).normalized();
      for (std::uint32_t d = 0; d < config.depths; ++d) {
        PoseCandidate c;
        c.point_index = point_index;
        c.view_index = j;
        c.angle_index = static_cast<std::uint16_t>(k);
        c.depth_index = static_cast<std::uint8_t>(d);
        c.rotation = q;
        c.anchor = point.position;
        c.translation = point.position + config.depth_values[d] * a;
        c.width = gripper.max_width;
        out.push_back(c);
      }
    }
  }
  return out;
}

}  // namespace partpose
