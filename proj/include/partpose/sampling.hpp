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
#include <span>
#include <vector>

#include "partpose/common.hpp"
#include "partpose/mesh.hpp"

namespace partpose {

struct SamplingConfig {
  std::uint32_t n = 512;      // candidate points per part
  std::uint32_t views = 64;   // approach directions V
  std::uint32_t angles = 12;  // in-plane rotations A over [0, pi)
  std::uint32_t depths = 4;   // gripper depths D
  std::vector<double> depth_values{0.01, 0.02, 0.03, 0.04};
  std::uint64_t seed = 0;

  void validate() const;
  /// Poses per (point, view): L = A * D.
  std::size_t poses_per_view() const { return std::size_t{angles} * depths; }
  std::size_t poses_per_point() const { return std::size_t{views} * poses_per_view(); }

  bool operator==(const SamplingConfig&) const = default;
};

/// Parallel-jaw gripper. Frame: +X approach, +Y closing direction, +Z finger
/// height; the origin sits midway between the fingertips.
struct GripperModel {
  double max_width = 0.10;
  double finger_length = 0.06;
  double finger_thickness = 0.01;
  double finger_height = 0.02;
  double palm_depth = 0.02;

  void validate() const;
  bool operator==(const GripperModel&) const = default;
};

struct PoseCandidate {
  std::uint32_t point_index = 0;
  std::uint32_t view_index = 0;
  std::uint16_t angle_index = 0;
  std::uint8_t depth_index = 0;
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 anchor = Vec3::Zero();  // surface point the pose was generated at
  double width = 0.0;
  double quality = 0.0;
  bool reasonable = true;
  bool collision_free = true;

  Vec3 approach() const { return rotation * Vec3::UnitX(); }
  Vec3 closing() const { return rotation * Vec3::UnitY(); }
};

struct SurfacePoint {
  Vec3 position;
  Vec3 normal;
};

/// Greedy farthest point sampling over `points` starting at `start`. Ties are
/// broken by lexicographic coordinate order, which makes the selected
/// sequence independent of input order. Returns indices into `points`.
std::vector<std::size_t> farthest_point_sample(std::span<const Vec3> points, std::size_t n, std::size_t start);

/// Area-weighted uniform surface samples with face normals.
std::vector<SurfacePoint> sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed);

/// FPS over the mesh's distinct vertices, or over 16*n area-weighted surface
/// samples when the mesh has fewer than n distinct vertices. The start point
/// is drawn from `seed`.
std::vector<SurfacePoint> farthest_point_sample(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

/// Fibonacci-sphere directions; v == 1 yields +Z.
std::vector<Vec3> sample_view_directions(std::uint32_t v);

/// Rotation whose +X column is `approach`, turned by `angle` about it.
Mat3 approach_frame(const Vec3& approach, double angle);

/// V*A*D candidates at one surface point, ordered (view, angle, depth).
std::vector<PoseCandidate> generate_pose_grid(const SurfacePoint& point, std::uint32_t point_index,
                                              const SamplingConfig& config, const GripperModel& gripper);
/// Same, with precomputed view directions.
std::vector<PoseCandidate> generate_pose_grid(const SurfacePoint& point, std::uint32_t point_index,
                                              std::span<const Vec3> views, const SamplingConfig& config,
                                              const GripperModel& gripper);

}  // namespace partpose
