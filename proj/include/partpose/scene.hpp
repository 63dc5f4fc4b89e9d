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
#include <filesystem>
#include <string>
#include <vector>

#include "partpose/asset.hpp"
#include "partpose/common.hpp"

namespace partpose {

/// Pinhole intrinsics (OpenCV convention: +Z forward, +X right, +Y down).
struct CameraIntrinsics {
  int width = 1280;
  int height = 720;
  double fx = 920.0;
  double fy = 920.0;
  double cx = 639.5;
  double cy = 359.5;

  void validate() const;
  /// Camera-frame ray through pixel (u, v) with unit z component.
  Vec3 ray(double u, double v) const { return {(u - cx) / fx, (v - cy) / fy, 1.0}; }
  /// Smallest half field of view (horizontal or vertical), radians.
  double min_half_fov() const;
  double diagonal_pixels() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

enum class CameraKind { kObjectCentric, kPartCentric };

struct CameraPose {
  Vec3 position = Vec3::Zero();
  Vec3 target = Vec3::UnitX();
  Vec3 up = Vec3::UnitZ();
  // Placement parameters the pose was drawn with (degrees, meters).
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double radius = 0.0;

  /// Camera-to-world transform. Throws ValidationError if position == target.
  Rigid camera_to_world() const;
};

/// Places a camera on a sphere around `center`. Latitude is elevation above
/// the frame's XY plane, longitude is measured from the frame's +X axis
/// toward +Y; the camera looks at `center` with the frame's +Z as up hint.
CameraPose camera_on_sphere(const Vec3& center, const Mat3& frame, double latitude_deg, double longitude_deg,
                            double radius);

struct SceneSample {
  std::string asset_id;
  JointConfig config;
  CameraPose camera;
  CameraIntrinsics intrinsics;
  std::vector<double> depth;          // row-major meters, 0 = no hit
  std::vector<Vec3> cloud;            // camera frame
  std::vector<std::int32_t> labels;   // part index, or kBackgroundLabel
  std::vector<std::uint32_t> pixels;  // row-major pixel index of each cloud point
  double ground_height = 0.0;

  std::vector<Vec3> world_cloud() const;
};

inline constexpr std::int32_t kBackgroundLabel = -1;
/// Rays travelling farther than this (meters of z-depth) count as no hit.
inline constexpr double kMaxRenderDepth = 10.0;

// Angular placement ranges, degrees.
struct PlacementRange {
  double lat_lo, lat_hi, lon_lo, lon_hi;
};
inline constexpr PlacementRange kObjectCentricRange{10.0, 60.0, -60.0, 60.0};
inline constexpr PlacementRange kPartCentricRange{0.0, 60.0, -75.0, 75.0};
/// Minimum fraction of the image diagonal covered by a part-centric target.
inline constexpr double kPartCoverage = 0.4;

JointConfig randomize_joints(const ArticulatedAsset& asset, std::uint64_t seed);

/// Latitude/longitude drawn uniformly in the object-centric ranges around the
/// bounds center; the radius keeps the bounding sphere inside the narrower
/// field of view, scaled by a random factor in [1, 1.5].
CameraPose sample_camera_object_centric(const Aabb& bounds, std::uint64_t seed,
                                        const CameraIntrinsics& intrinsics = {});

/// Same scheme in the part frame; the radius makes the part's bounding
/// sphere span at least 40% of the image diagonal.
CameraPose sample_camera_part_centric(const Rigid& part_pose, const Aabb& part_bounds, std::uint64_t seed,
                                      const CameraIntrinsics& intrinsics = {});

/// Camera-frame points for every pixel with depth > 0, in row-major order.
std::vector<Vec3> back_project(const std::vector<double>& depth, const CameraIntrinsics& intrinsics,
                               std::vector<std::uint32_t>* pixels = nullptr);

/// Renders z-depth of the posed asset (link meshes and fused part meshes)
/// plus the ground plane z = ground_height. Requires fused parts.
SceneSample raycast_depth(const ArticulatedAsset& asset, const JointConfig& config, const CameraPose& camera,
                          const CameraIntrinsics& intrinsics, double ground_height = 0.0, unsigned threads = 0);

// File formats: 16-bit PNG depth in millimeters (0 = invalid), JSON camera
// sidecar, binary PLY cloud with an int part_id per vertex.
void write_depth_png(const std::filesystem::path& path, const std::vector<double>& depth, int width, int height);
std::vector<double> read_depth_png(const std::filesystem::path& path, int* width = nullptr, int* height = nullptr);
void write_camera_json(const std::filesystem::path& path, const CameraIntrinsics& intrinsics, const CameraPose& camera);
void read_camera_json(const std::filesystem::path& path, CameraIntrinsics& intrinsics, CameraPose& camera);
void write_cloud_ply(const std::filesystem::path& path, const std::vector<Vec3>& cloud,
                     const std::vector<std::int32_t>& labels);
void read_cloud_ply(const std::filesystem::path& path, std::vector<Vec3>& cloud, std::vector<std::int32_t>& labels);

}  // namespace partpose
