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
#include <string>
#include <vector>

#include "partpose/asset.hpp"
#include "partpose/filtering.hpp"
#include "partpose/mesh.hpp"
#include "partpose/sampling.hpp"

namespace partpose {

/// Closed box with outward winding.
TriMesh make_box(const Vec3& lo, const Vec3& hi);

/// Closed cylinder along +Z centered at the origin: 2*segments*rings side
/// triangles plus 2*segments cap triangles.
TriMesh make_cylinder(double radius, double length, std::uint32_t segments, std::uint32_t rings);

/// Cabinet used by the demo and the benchmarks: a fixed body,
/// a hinged door with a bar handle and a sliding drawer with a bar handle.
ArticulatedAsset make_demo_cabinet();

/// Synthetic filtering workload: `scene_points` area-weighted samples over
/// the posed asset (labelled per part, -1 for link geometry) and the full
/// pose grid at `config.n` FPS points of `part_id`, in world frame.
struct FilterWorkload {
  CollisionScene scene;
  std::vector<PoseCandidate> candidates;
  std::int32_t target = kBackgroundLabel;
  GripperModel gripper;
};

FilterWorkload make_filter_workload(const ArticulatedAsset& fused, const std::string& part_id,
                                    std::size_t scene_points, const SamplingConfig& config, std::uint64_t seed);

}  // namespace partpose
