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

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <array>
#include <vector>
#include <unistd.h>

#include "partpose/asset.hpp"
#include "partpose/filtering.hpp"
#include "partpose/sampling.hpp"
#include "partpose/seed.hpp"
#include "partpose/shapes.hpp"

namespace partpose::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("partpose_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// One-link asset whose single part is `mesh`.
inline ArticulatedAsset single_part_asset(const TriMesh& mesh, const std::string& id = "handle") {
  ArticulatedAsset a;
  a.id = "single";
  a.links = {{"base", {}, {}}};
  GAPart p;
  p.part_id = id;
  p.owning_link = "base";
  p.mesh_files = {id + ".obj"};
  p.source_meshes = {mesh};
  a.parts = {p};
  a.validate();
  return fuse_part_meshes(a);
}

/// 10,000-triangle bar: 100 segments x 49 rings plus caps.
inline TriMesh dense_handle_mesh() { return make_cylinder(0.015, 0.2, 100, 49); }

/// Closed convex mesh from a point set given as quads/triangles; each
/// triangle is wound to face away from the centroid.
inline TriMesh convex_mesh(const std::vector<Vec3>& v, const std::vector<std::array<std::uint32_t, 3>>& faces) {
  TriMesh m;
  m.vertices = v;
  Vec3 c = Vec3::Zero();
  for (const auto& p : v) c += p;
  c /= static_cast<double>(v.size());
  for (auto f : faces) {
    const Vec3 n = (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
    if (n.dot(v[f[0]] - c) < 0) std::swap(f[1], f[2]);
    m.faces.push_back(f);
  }
  m.compute_vertex_normals();
  return m;
}

/// Prism along X whose +Y and -Y faces are tilted by `theta` about X, so
/// their normals deviate `theta` from the Y axis. Half-gap `h` at z = 0.
inline TriMesh make_wedge(double theta, double h = 0.02, double half_height = 0.01, double half_len = 0.05) {
  const double t = std::tan(theta);
  std::vector<Vec3> v;
  for (double x : {-half_len, half_len}) {
    v.emplace_back(x, h + t * half_height, -half_height);
    v.emplace_back(x, h - t * half_height, half_height);
    v.emplace_back(x, -(h - t * half_height), half_height);
    v.emplace_back(x, -(h + t * half_height), -half_height);
  }
  return convex_mesh(v, {{0, 1, 2}, {0, 2, 3}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                         {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}});
}

inline TriMesh make_uv_sphere(double r, std::uint32_t slices = 64, std::uint32_t stacks = 32) {
  TriMesh m;
  m.vertices.emplace_back(0, 0, r);
  for (std::uint32_t i = 1; i < stacks; ++i) {
    const double th = kPi * i / stacks;
    for (std::uint32_t j = 0; j < slices; ++j) {
      const double ph = 2 * kPi * j / slices;
      m.vertices.emplace_back(r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph), r * std::cos(th));
    }
  }
  m.vertices.emplace_back(0, 0, -r);
  const auto ring = [&](std::uint32_t i, std::uint32_t j) { return 1 + (i - 1) * slices + j % slices; };
  const std::uint32_t south = static_cast<std::uint32_t>(m.vertices.size() - 1);
  for (std::uint32_t j = 0; j < slices; ++j) {
    m.faces.push_back({0, ring(1, j), ring(1, j + 1)});
    for (std::uint32_t i = 1; i + 1 < stacks; ++i) {
      m.faces.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      m.faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
    m.faces.push_back({ring(stacks - 1, j), south, ring(stacks - 1, j + 1)});
  }
  m.compute_vertex_normals();
  return m;
}

/// Gripper centered `depth` past `anchor` along `rotation`'s +X, fully open.
inline PoseCandidate make_candidate(const Vec3& anchor, const Quat& rotation, double depth,
                                    const GripperModel& g = {}) {
  PoseCandidate c;
  c.rotation = rotation;
  c.anchor = anchor;
  c.translation = anchor + depth * (rotation * Vec3::UnitX());
  c.width = g.max_width;
  return c;
}

/// Random collision scene: a cloud of `points` points scattered around a
/// few boxes (label 0 is the target part) plus `candidates` poses anchored
/// at cloud points. Candidates come in view-major grid blocks so the batch
/// engine sees realistic runs, with some fully random poses mixed in.
struct RandomFilterCase {
  CollisionScene scene;
  std::vector<PoseCandidate> candidates;
  GripperModel gripper;
};

inline RandomFilterCase random_filter_case(std::uint64_t seed, std::size_t points, std::size_t candidates) {
  Rng rng(seed);
  RandomFilterCase out;
  const int boxes = 1 + static_cast<int>(rng.below(4));
  std::vector<std::pair<Vec3, Vec3>> shapes;
  for (int b = 0; b < boxes; ++b) {
    const Vec3 c(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.0, 0.3));
    const Vec3 h(rng.uniform(0.005, 0.1), rng.uniform(0.005, 0.1), rng.uniform(0.005, 0.1));
    shapes.emplace_back(c - h, c + h);
  }
  for (std::size_t i = 0; i < points; ++i) {
    const auto b = rng.below(shapes.size() + 1);
    if (b == shapes.size()) {
      out.scene.points.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.0, 0.5));
      out.scene.labels.push_back(kBackgroundLabel);
      continue;
    }
    const auto& [lo, hi] = shapes[b];
    Vec3 p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()), rng.uniform(lo.z(), hi.z()));
    const auto axis = rng.below(3);
    p[axis] = rng.uniform() < 0.5 ? lo[axis] : hi[axis];
    out.scene.points.push_back(p);
    out.scene.labels.push_back(static_cast<std::int32_t>(b == 0 ? 0 : b));
  }
  if (rng.uniform() < 0.5) out.scene.ground_height = rng.uniform(-0.05, 0.05);
  out.scene.camera_position = Vec3(rng.uniform(0.5, 1.0), rng.uniform(-0.5, 0.5), rng.uniform(0.3, 1.0));

  SamplingConfig cfg;
  cfg.views = 8;
  cfg.angles = 6;
  cfg.depths = 2;
  cfg.depth_values = {0.01, 0.03};
  while (out.candidates.size() < candidates) {
    const auto k = rng.below(points == 0 ? 1 : points);
    const Vec3 anchor = points == 0 ? Vec3::Zero() : out.scene.points[k];
    if (rng.uniform() < 0.8) {
      auto grid = generate_pose_grid(SurfacePoint{anchor, Vec3::UnitZ()}, static_cast<std::uint32_t>(k), cfg,
                                     out.gripper);
      const double width = rng.uniform(0.01, out.gripper.max_width);
      for (auto& c : grid) {
        if (out.candidates.size() == candidates) break;
        c.width = width;
        out.candidates.push_back(c);
      }
    } else {
      PoseCandidate c;
      c.point_index = static_cast<std::uint32_t>(k);
      c.rotation = Quat(Eigen::AngleAxisd(rng.uniform(0, 2 * kPi),
                                          Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized()));
      c.anchor = anchor;
      c.translation = anchor + rng.uniform(0.0, 0.05) * c.approach();
      c.width = rng.uniform(0.01, out.gripper.max_width);
      out.candidates.push_back(c);
    }
  }
  return out;
}

}  // namespace partpose::testing
