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

#include "partpose/scene.hpp"

#include <cmath>

#include "partpose/bvh.hpp"
#include "partpose/parallel.hpp"
#include "partpose/seed.hpp"

namespace partpose {

void CameraIntrinsics::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("image dimensions must be positive");
  if (!(fx > 0.0 && fy > 0.0)) throw ValidationError("focal lengths must be positive");
  if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height))
    throw ValidationError("principal point must lie inside the image");
}

double CameraIntrinsics::min_half_fov() const {
  const double h = std::atan(std::min(cx, width - cx) / fx);
  const double v = std::atan(std::min(cy, height - cy) / fy);
  return std::min(h, v);
}

double CameraIntrinsics::diagonal_pixels() const {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

Rigid CameraPose::camera_to_world() const {
  const Vec3 fwd = target - position;
  if (!(fwd.norm() > 0.0)) throw ValidationError("camera position coincides with its target");
  const Vec3 f = fwd.normalized();
  Vec3 right = f.cross(up);
  if (right.norm() < 1e-9) right = f.cross(Vec3::UnitY());
  if (right.norm() < 1e-9) right = f.cross(Vec3::UnitX());
  right.normalize();
  const Vec3 down = f.cross(right);
  Rigid t = Rigid::Identity();
  t.linear() << right, down, f;
  t.translation() = position;
  return t;
}

CameraPose camera_on_sphere(const Vec3& center, const Mat3& frame, double latitude_deg, double longitude_deg,
                            double radius) {
  const double lat = deg2rad(latitude_deg), lon = deg2rad(longitude_deg);
  const Vec3 local(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
  CameraPose pose;
  pose.position = center + radius * (frame * local);
  pose.target = center;
  pose.up = frame.col(2);
  pose.latitude_deg = latitude_deg;
  pose.longitude_deg = longitude_deg;
  pose.radius = radius;
  return pose;
}

std::vector<Vec3> SceneSample::world_cloud() const {
  const Rigid t = camera.camera_to_world();
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(t * p);
  return out;
}

JointConfig randomize_joints(const ArticulatedAsset& asset, std::uint64_t seed) {
  Rng rng(seed);
  JointConfig cfg;
  cfg.values.reserve(asset.joints.size());
  for (const auto& j : asset.joints) {
    if (j.kind == JointKind::kFixed) {
      cfg.values.push_back(0.0);
      continue;
    }
    cfg.values.push_back(std::clamp(rng.uniform(j.lower, j.upper), j.lower, j.upper));
  }
  return cfg;
}

namespace {

double bounding_radius(const Aabb& b) { return std::max(0.5 * b.extent().norm(), 1e-6); }

}  // namespace

CameraPose sample_camera_object_centric(const Aabb& bounds, std::uint64_t seed, const CameraIntrinsics& intrinsics) {
  if (bounds.empty()) throw ValidationError("object bounds are empty");
  Rng rng(seed);
  const auto& r = kObjectCentricRange;
  const double lat = rng.uniform(r.lat_lo, r.lat_hi);
  const double lon = rng.uniform(r.lon_lo, r.lon_hi);
  const double fit = bounding_radius(bounds) / std::sin(intrinsics.min_half_fov());
  const double radius = fit * rng.uniform(1.0, 1.5);
  return camera_on_sphere(bounds.center(), Mat3::Identity(), lat, lon, radius);
}

CameraPose sample_camera_part_centric(const Rigid& part_pose, const Aabb& part_bounds, std::uint64_t seed,
                                      const CameraIntrinsics& intrinsics) {
  if (part_bounds.empty()) throw ValidationError("part bounds are empty");
  Rng rng(seed);
  const auto& r = kPartCentricRange;
  const double lat = rng.uniform(r.lat_lo, r.lat_hi);
  const double lon = rng.uniform(r.lon_lo, r.lon_hi);
  // A sphere of radius rho at distance d projects to a disc of diameter
  // about 2 f rho / sqrt(d^2 - rho^2) pixels.
  const double rho = bounding_radius(part_bounds);
  const double f = std::min(intrinsics.fx, intrinsics.fy);
  const double k = 0.5 * kPartCoverage * intrinsics.diagonal_pixels() / f;
  const double max_radius = rho * std::sqrt(1.0 + 1.0 / (k * k));
  const double radius = max_radius * rng.uniform(0.8, 1.0);
  return camera_on_sphere(part_pose * part_bounds.center(), part_pose.linear(), lat, lon, radius);
}

std::vector<Vec3> back_project(const std::vector<double>& depth, const CameraIntrinsics& intrinsics,
                               std::vector<std::uint32_t>* pixels) {
  std::vector<Vec3> cloud;
  if (pixels) pixels->clear();
  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      const auto idx = static_cast<std::size_t>(v) * intrinsics.width + u;
      const double z = depth[idx];
      if (!(z > 0.0) || !std::isfinite(z)) continue;
      cloud.push_back(z * intrinsics.ray(u, v));
      if (pixels) pixels->push_back(static_cast<std::uint32_t>(idx));
    }
  }
  return cloud;
}

SceneSample raycast_depth(const ArticulatedAsset& asset, const JointConfig& config, const CameraPose& camera,
                          const CameraIntrinsics& intrinsics, double ground_height, unsigned threads) {
  intrinsics.validate();
  if (!asset.fused()) throw ValidationError("raycast_depth needs fused part meshes");
  const KinematicState state = forward_kinematics(asset, config);
  TriangleBvh bvh;
  for (std::size_t l = 0; l < asset.links.size(); ++l)
    for (const auto& m : asset.links[l].meshes) bvh.add(m, state.links[l], kBackgroundLabel);
  for (std::size_t p = 0; p < asset.parts.size(); ++p)
    bvh.add(*asset.parts[p].fused_mesh, state.parts[p], static_cast<std::int32_t>(p));
  bvh.build();

  const Rigid cam = camera.camera_to_world();
  const Mat3 rot = cam.linear();
  const Vec3 origin = cam.translation();
  const auto npix = static_cast<std::size_t>(intrinsics.width) * intrinsics.height;
  std::vector<double> depth(npix, 0.0);
  std::vector<std::int32_t> pixel_label(npix, kBackgroundLabel);

  parallel_for(static_cast<std::size_t>(intrinsics.height), threads, [&](std::size_t v0, std::size_t v1) {
    for (std::size_t v = v0; v < v1; ++v) {
      for (int u = 0; u < intrinsics.width; ++u) {
        // Unit z in camera frame, so the ray parameter is z-depth.
        const Vec3 dir = rot * intrinsics.ray(u, static_cast<double>(v));
        double best = std::numeric_limits<double>::infinity();
        std::int32_t label = kBackgroundLabel;
        if (dir.z() != 0.0) {
          const double t = (ground_height - origin.z()) / dir.z();
          if (t > 0.0 && t <= kMaxRenderDepth) best = t;
        }
        if (const auto hit = bvh.intersect(origin, dir, 1e-9, std::min(best, kMaxRenderDepth))) {
          if (hit->t < best) {
            best = hit->t;
            label = hit->tag;
          }
        }
        const auto idx = v * intrinsics.width + u;
        if (std::isfinite(best)) {
          depth[idx] = best;
          pixel_label[idx] = label;
        }
      }
    }
  });

  SceneSample s;
  s.asset_id = asset.id;
  s.config = config;
  s.camera = camera;
  s.intrinsics = intrinsics;
  s.ground_height = ground_height;
  s.depth = std::move(depth);
  s.cloud = back_project(s.depth, intrinsics, &s.pixels);
  s.labels.reserve(s.pixels.size());
  for (auto px : s.pixels) s.labels.push_back(pixel_label[px]);
  return s;
}

}  // namespace partpose
