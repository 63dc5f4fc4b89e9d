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

#include "partpose/shapes.hpp"

#include <cmath>

#include "partpose/seed.hpp"

namespace partpose {

TriMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriMesh m;
  for (int k = 0; k < 8; ++k)
    m.vertices.emplace_back(k & 1 ? hi.x() : lo.x(), k & 2 ? hi.y() : lo.y(), k & 4 ? hi.z() : lo.z());
  m.faces = {{0, 2, 3}, {0, 3, 1},   // -z
             {4, 5, 7}, {4, 7, 6},   // +z
             {0, 1, 5}, {0, 5, 4},   // -y
             {2, 6, 7}, {2, 7, 3},   // +y
             {0, 4, 6}, {0, 6, 2},   // -x
             {1, 3, 7}, {1, 7, 5}};  // +x
  m.compute_vertex_normals();
  return m;
}

TriMesh make_cylinder(double radius, double length, std::uint32_t segments, std::uint32_t rings) {
  if (segments < 3 || rings < 1) throw ValidationError("cylinder needs >= 3 segments and >= 1 ring");
  TriMesh m;
  for (std::uint32_t r = 0; r <= rings; ++r) {
    const double z = -0.5 * length + length * r / rings;
    for (std::uint32_t s = 0; s < segments; ++s) {
      const double a = 2.0 * kPi * s / segments;
      m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  auto at = [&](std::uint32_t r, std::uint32_t s) { return r * segments + s % segments; };
  for (std::uint32_t r = 0; r < rings; ++r)
    for (std::uint32_t s = 0; s < segments; ++s) {
      m.faces.push_back({at(r, s), at(r, s + 1), at(r + 1, s + 1)});
      m.faces.push_back({at(r, s), at(r + 1, s + 1), at(r + 1, s)});
    }
  const auto bottom = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.emplace_back(0.0, 0.0, -0.5 * length);
  m.vertices.emplace_back(0.0, 0.0, 0.5 * length);
  for (std::uint32_t s = 0; s < segments; ++s) {
    m.faces.push_back({bottom, at(0, s + 1), at(0, s)});
    m.faces.push_back({bottom + 1, at(rings, s), at(rings, s + 1)});
  }
  m.compute_vertex_normals();
  return m;
}

ArticulatedAsset make_demo_cabinet() {
  ArticulatedAsset a;
  a.id = "demo_cabinet";
  a.links = {{"body", {"meshes/body.obj"}, {make_box({-0.4, -0.3, 0.0}, {0.0, 0.3, 0.8})}},
             {"door", {}, {}},
             {"drawer", {}, {}}};

  Joint hinge;
  hinge.name = "door_hinge";
  hinge.parent = "body";
  hinge.child = "door";
  hinge.kind = JointKind::kRevolute;
  hinge.axis = -Vec3::UnitZ();
  hinge.origin.translation() = Vec3(0.01, -0.3, 0.0);
  hinge.lower = 0.0;
  hinge.upper = 1.5;
  Joint slide;
  slide.name = "drawer_slide";
  slide.parent = "body";
  slide.child = "drawer";
  slide.kind = JointKind::kPrismatic;
  slide.axis = Vec3::UnitX();
  slide.lower = 0.0;
  slide.upper = 0.25;
  a.joints = {hinge, slide};

  // Door frame: hinge line on the Z axis, panel extending toward +Y.
  GAPart door;
  door.part_id = "door";
  door.semantic_class = PartClass::kHingeDoor;
  door.owning_link = "door";
  door.mesh_files = {"meshes/door_panel.obj"};
  door.source_meshes = {make_box({-0.01, 0.0, 0.05}, {0.01, 0.295, 0.78})};

  GAPart door_handle;
  door_handle.part_id = "door_handle";
  door_handle.semantic_class = PartClass::kLineFixedHandle;
  door_handle.owning_link = "door";
  door_handle.mesh_files = {"meshes/door_handle_bar.obj", "meshes/door_handle_top.obj", "meshes/door_handle_bottom.obj"};
  door_handle.source_meshes = {make_box({0.03, 0.25, 0.45}, {0.045, 0.265, 0.65}),
                               make_box({0.01, 0.25, 0.62}, {0.03, 0.265, 0.635}),
                               make_box({0.01, 0.25, 0.465}, {0.03, 0.265, 0.48})};

  GAPart drawer;
  drawer.part_id = "drawer";
  drawer.semantic_class = PartClass::kSliderDrawer;
  drawer.owning_link = "drawer";
  drawer.mesh_files = {"meshes/drawer_front.obj"};
  drawer.source_meshes = {make_box({0.0, 0.005, 0.55}, {0.02, 0.3, 0.78})};

  GAPart drawer_handle;
  drawer_handle.part_id = "drawer_handle";
  drawer_handle.semantic_class = PartClass::kLineFixedHandle;
  drawer_handle.owning_link = "drawer";
  drawer_handle.mesh_files = {"meshes/drawer_handle_bar.obj", "meshes/drawer_handle_left.obj",
                              "meshes/drawer_handle_right.obj"};
  drawer_handle.source_meshes = {make_box({0.04, 0.08, 0.66}, {0.055, 0.22, 0.675}),
                                 make_box({0.02, 0.09, 0.66}, {0.04, 0.105, 0.675}),
                                 make_box({0.02, 0.195, 0.66}, {0.04, 0.21, 0.675})};

  a.parts = {door, door_handle, drawer, drawer_handle};
  a.validate();
  return a;
}

FilterWorkload make_filter_workload(const ArticulatedAsset& fused, const std::string& part_id,
                                    std::size_t scene_points, const SamplingConfig& config, std::uint64_t seed) {
  if (!fused.fused()) throw ValidationError("workload needs a fused asset");
  const auto target = fused.part_index(part_id);
  const KinematicState state = forward_kinematics(fused, fused.zero_config());

  struct Source {
    const TriMesh* mesh;
    Rigid pose;
    std::int32_t label;
  };
  std::vector<Source> sources;
  for (std::size_t l = 0; l < fused.links.size(); ++l)
    for (const auto& m : fused.links[l].meshes) sources.push_back({&m, state.links[l], kBackgroundLabel});
  for (std::size_t p = 0; p < fused.parts.size(); ++p)
    sources.push_back({&*fused.parts[p].fused_mesh, state.parts[p], static_cast<std::int32_t>(p)});
  double total = 0.0;
  for (const auto& s : sources) total += s.mesh->surface_area();

  FilterWorkload w;
  w.target = static_cast<std::int32_t>(target);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const auto& s = sources[k];
    const std::size_t count =
        k + 1 == sources.size()
            ? scene_points - assigned
            : std::min(scene_points - assigned,
                       static_cast<std::size_t>(std::llround(scene_points * s.mesh->surface_area() / total)));
    assigned += count;
    if (count == 0) continue;
    for (const auto& p : sample_surface(*s.mesh, count, derive_seed(seed, Stage::kBenchmark, k))) {
      w.scene.points.push_back(s.pose * p.position);
      w.scene.labels.push_back(s.label);
    }
  }
  w.scene.ground_height = 0.0;
  w.scene.camera_position = Vec3(1.2, 0.2, 1.0);

  const auto anchors =
      farthest_point_sample(*fused.parts[target].fused_mesh, config.n, derive_seed(seed, Stage::kFarthestPointStart, 0));
  const auto views = sample_view_directions(config.views);
  std::vector<PoseCandidate> local;
  local.reserve(anchors.size() * config.poses_per_point());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    auto grid = generate_pose_grid(anchors[i], static_cast<std::uint32_t>(i), views, config, w.gripper);
    local.insert(local.end(), grid.begin(), grid.end());
  }
  w.candidates = project_poses(local, state.parts[target]);
  return w;
}

}  // namespace partpose
