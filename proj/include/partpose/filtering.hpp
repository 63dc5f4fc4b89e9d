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
#include <optional>
#include <span>
#include <vector>

#include "partpose/common.hpp"
#include "partpose/sampling.hpp"
#include "partpose/scene.hpp"

namespace partpose {

/// Closed axis-aligned box in the gripper frame.
struct Box {
  Vec3 lo, hi;
  bool contains(const Vec3& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y() && p.z() >= lo.z() &&
           p.z() <= hi.z();
  }
};

/// Collision boxes of a parallel-jaw gripper opened to `width`. The closing
/// region between the fingers is not part of the volume; it only matters for
/// points that do not belong to the grasped part.
struct GripperVolume {
  enum : std::size_t { kLeftFinger, kRightFinger, kPalm, kApproachClearance };
  std::array<Box, 4> boxes;
  Box closing_region;

  static GripperVolume make(const GripperModel& gripper, double width);
  /// Every box shrunk by `margin` on each side.
  GripperVolume shrunk(double margin) const;
};

/// Length of the clearance box behind the palm.
double approach_clearance_length(const GripperModel& gripper);

/// World-frame scene geometry the gripper is tested against.
struct CollisionScene {
  std::vector<Vec3> points;
  std::vector<std::int32_t> labels;      // same length as points
  std::optional<double> ground_height;   // analytic plane z = h, if present
  Vec3 camera_position = Vec3::Zero();

  static CollisionScene from_sample(const SceneSample& sample);
};

struct FilterReport {
  std::size_t input = 0;
  std::size_t unreasonable = 0;  // includes poses that are also unreachable
  std::size_t unreachable = 0;
  std::size_t survivors = 0;
  double project_ms = 0.0;
  double reasonable_ms = 0.0;
  double collision_ms = 0.0;
  unsigned threads = 1;
};

struct CollisionOptions {
  unsigned threads = 0;
  double shrink = 0.0;     // shrink every gripper box by this margin
  double cell_size = 0.0;  // voxel edge; 0 picks 1/8 of the gripper's largest dimension
};

/// Rotations and translations (and anchors) composed with `part_pose`.
std::vector<PoseCandidate> project_poses(std::span<const PoseCandidate> candidates, const Rigid& part_pose);

/// Reasonable iff a cloud point lies within tau of the anchor and the
/// approach direction points away from the camera side (approach . (anchor - camera) > 0).
/// With an empty cloud only the facing test applies.
std::vector<std::uint8_t> filter_unreasonable(std::span<const PoseCandidate> candidates,
                                              const CollisionScene& scene, double tau, unsigned threads = 0);
std::vector<std::uint8_t> filter_unreasonable_naive(std::span<const PoseCandidate> candidates,
                                                    const CollisionScene& scene, double tau);

/// Single-pose collision test against every scene point and the ground.
bool pose_collides(const PoseCandidate& candidate, const GripperVolume& volume, const CollisionScene& scene,
                   std::int32_t target_label);

/// Returns c per candidate: 1 iff collision-free. Points labelled
/// `target_label` inside the closing region are exempt.
std::vector<std::uint8_t> filter_collisions(std::span<const PoseCandidate> candidates, const CollisionScene& scene,
                                            const GripperModel& gripper, std::int32_t target_label,
                                            const CollisionOptions& options = {});
/// Reference loop: every candidate against every point.
std::vector<std::uint8_t> filter_collisions_naive(std::span<const PoseCandidate> candidates,
                                                  const CollisionScene& scene, const GripperModel& gripper,
                                                  std::int32_t target_label, double shrink = 0.0);

/// Runs both filters, stores the flags on the candidates and reports counts
/// and per-stage wall clock. Flags do not depend on `threads`.
FilterReport filter_batch(std::span<PoseCandidate> candidates, const CollisionScene& scene,
                          const GripperModel& gripper, std::int32_t target_label, double tau, unsigned threads = 0);

}  // namespace partpose
