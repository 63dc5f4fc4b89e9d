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

#include "partpose/pipeline.hpp"

#include <chrono>

#include "partpose/antipodal.hpp"
#include "partpose/bvh.hpp"
#include "partpose/parallel.hpp"
#include "partpose/seed.hpp"

namespace partpose {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Surface samples per candidate point for the part-level self-collision pass.
constexpr std::size_t kCollisionSamplesPerPoint = 16;

}  // namespace

std::vector<std::size_t> selected_parts(const ArticulatedAsset& asset, const RunSettings& settings) {
  std::vector<std::size_t> out;
  if (settings.part_ids.empty()) {
    for (std::size_t p = 0; p < asset.parts.size(); ++p) out.push_back(p);
  } else {
    for (const auto& id : settings.part_ids) out.push_back(asset.part_index(id));
  }
  return out;
}

PartAnnotation annotate_part(const ArticulatedAsset& asset, std::size_t part, const RunSettings& settings,
                             unsigned threads) {
  if (part >= asset.parts.size()) throw ValidationError("part index out of range");
  const auto& gp = asset.parts[part];
  if (!gp.fused_mesh) throw ValidationError("part " + gp.part_id + " has no fused mesh");
  settings.sampling.validate();
  settings.gripper.validate();
  settings.friction.validate();
  const TriMesh& mesh = *gp.fused_mesh;

  PartAnnotation out;
  out.part_index = part;
  out.part_id = gp.part_id;

  auto t0 = std::chrono::steady_clock::now();
  out.anchors = farthest_point_sample(mesh, settings.sampling.n,
                                      derive_seed(settings.root_seed, Stage::kFarthestPointStart, part));
  const auto views = sample_view_directions(settings.sampling.views);
  const std::size_t per_point = settings.sampling.poses_per_point();
  out.candidates.resize(out.anchors.size() * per_point);
  parallel_for(out.anchors.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto grid =
          generate_pose_grid(out.anchors[i], static_cast<std::uint32_t>(i), views, settings.sampling, settings.gripper);
      std::copy(grid.begin(), grid.end(), out.candidates.begin() + static_cast<std::ptrdiff_t>(i * per_point));
    }
  });
  out.sample_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  const TriangleBvh bvh(mesh);
  score_candidates(out.candidates, bvh, settings.gripper, settings.friction, threads);
  out.score_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  CollisionScene self;
  for (const auto& s : sample_surface(mesh, kCollisionSamplesPerPoint * settings.sampling.n,
                                      derive_seed(settings.root_seed, Stage::kCollisionSurface, part)))
    self.points.push_back(s.position);
  self.labels.assign(self.points.size(), 0);
  CollisionOptions opts;
  opts.threads = threads;
  const auto free = filter_collisions(out.candidates, self, settings.gripper, 0, opts);
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    out.candidates[i].reasonable = true;
    out.candidates[i].collision_free = free[i] != 0;
  }
  out.collision_ms = ms_since(t0);
  return out;
}

ViewAnnotation annotate_view(const ArticulatedAsset& asset, std::span<const PartAnnotation> parts,
                             const JointConfig& config, const CameraPose& camera, CameraKind kind,
                             const RunSettings& settings, unsigned threads) {
  ViewAnnotation out;
  out.kind = kind;
  out.sample = raycast_depth(asset, config, camera, settings.intrinsics, settings.ground_height, threads);
  const KinematicState state = forward_kinematics(asset, config);
  const CollisionScene scene = CollisionScene::from_sample(out.sample);
  const ActionessConfig acfg = ActionessConfig::from(settings.sampling, settings.threshold);

  std::vector<AnchorScores> anchors;
  for (const auto& pa : parts) {
    const Rigid& pose = state.parts[pa.part_index];
    const auto t0 = std::chrono::steady_clock::now();
    auto world = project_poses(pa.candidates, pose);
    const double project_ms = ms_since(t0);
    FilterReport report =
        filter_batch(world, scene, settings.gripper, static_cast<std::int32_t>(pa.part_index), settings.tau, threads);
    report.project_ms = project_ms;
    out.filters.push_back({pa.part_id, report.input, report.unreasonable, report.unreachable, report.survivors});
    out.reports.push_back(report);

    AnchorScores as;
    as.label = static_cast<std::int32_t>(pa.part_index);
    for (const auto& a : pa.anchors) as.anchors.push_back(pose * a.position);
    const std::vector<std::uint8_t> act(pa.anchors.size(), asset.parts[pa.part_index].actionable ? 1 : 0);
    as.scores = compute_actioness(act, world, acfg, threads);
    anchors.push_back(std::move(as));
  }
  const auto c_act = assign_actionable_labels(out.sample, asset);
  out.labels = transfer_actioness(out.sample, c_act, anchors, settings.sampling.views, kTransferRadius, threads);
  return out;
}

Archive run_pipeline(const ArticulatedAsset& asset, const RunSettings& settings, unsigned threads,
                     const Progress& progress) {
  if (!asset.fused()) throw ValidationError("asset parts must be fused before annotation");
  auto note = [&](const std::string& s) {
    if (progress) progress(s);
  };
  Archive archive;
  archive.asset_id = asset.id;
  archive.tool_version = kToolVersion;
  archive.settings = settings;
  archive.settings.sampling.seed = settings.root_seed;

  std::vector<PartAnnotation> parts;
  for (std::size_t p : selected_parts(asset, settings)) {
    parts.push_back(annotate_part(asset, p, archive.settings, threads));
    const auto& pa = parts.back();
    note("part " + pa.part_id + ": " + std::to_string(pa.candidates.size()) + " candidates");
    PartTable t;
    t.part_id = pa.part_id;
    t.records.reserve(pa.candidates.size());
    for (const auto& c : pa.candidates) t.records.push_back(PoseRecord::from(c));
    archive.parts.push_back(std::move(t));
  }

  for (std::uint32_t c = 0; c < settings.scene_configs; ++c) {
    const JointConfig config = randomize_joints(asset, derive_seed(settings.root_seed, Stage::kJointConfig, c));
    const KinematicState state = forward_kinematics(asset, config);
    const Aabb bounds = world_bounds(asset, state);
    auto add = [&](const CameraPose& cam, CameraKind kind, const std::string& target) {
      ViewAnnotation v = annotate_view(asset, parts, config, cam, kind, archive.settings, threads);
      SceneRecord r = SceneRecord::from(v.sample, kind);
      r.config_index = c;
      r.target_part = target;
      r.views = v.labels.views;
      r.point_scores.assign(v.labels.point_scores.begin(), v.labels.point_scores.end());
      r.view_scores.assign(v.labels.view_scores.begin(), v.labels.view_scores.end());
      r.filters = v.filters;
      archive.scenes.push_back(std::move(r));
      note("scene " + std::to_string(archive.scenes.size() - 1) + ": " + std::to_string(v.sample.cloud.size()) +
           " points");
    };
    for (std::uint32_t v = 0; v < settings.object_views; ++v) {
      const auto seed = derive_seed(settings.root_seed, Stage::kObjectCamera, std::uint64_t{c} * settings.object_views + v);
      add(sample_camera_object_centric(bounds, seed, settings.intrinsics), CameraKind::kObjectCentric, "");
    }
    if (parts.empty()) continue;
    for (std::uint32_t v = 0; v < settings.part_views; ++v) {
      const auto& target = parts[v % parts.size()];
      const auto seed = derive_seed(settings.root_seed, Stage::kPartCamera, std::uint64_t{c} * settings.part_views + v);
      const Aabb pb = asset.parts[target.part_index].fused_mesh->bounds();
      add(sample_camera_part_centric(state.parts[target.part_index], pb, seed, settings.intrinsics),
          CameraKind::kPartCentric, target.part_id);
    }
  }
  return archive;
}

}  // namespace partpose
