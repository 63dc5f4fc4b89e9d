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

// Command line front end: part and scene annotation, rendering, evaluation
// and the filtering benchmark.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "partpose/archive.hpp"
#include "partpose/metrics.hpp"
#include "partpose/pipeline.hpp"
#include "partpose/seed.hpp"
#include "partpose/shapes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace partpose;

namespace {

struct CommonFlags {
  std::string asset;
  std::vector<std::string> parts;
  std::uint64_t seed = 0;
  std::uint32_t n = 512, views = 64, angles = 12, depths = 4;
  std::vector<double> depth_values{0.01, 0.02, 0.03, 0.04};
  std::vector<double> mu_grid = FrictionGrid{}.mu_values;
  double threshold = 0.5;
  double tau = 0.005;
  unsigned threads = 0;

  RunSettings settings() const {
    RunSettings s;
    s.asset_path = asset;
    s.part_ids = parts;
    s.root_seed = seed;
    s.sampling.n = n;
    s.sampling.views = views;
    s.sampling.angles = angles;
    s.sampling.depths = depths;
    s.sampling.depth_values = depth_values;
    s.sampling.seed = seed;
    s.friction.mu_values = mu_grid;
    s.threshold = threshold;
    s.tau = tau;
    return s;
  }
};

void add_sampling_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Root seed");
  cmd->add_option("--n", f.n, "Candidate points per part");
  cmd->add_option("--views", f.views, "Approach directions");
  cmd->add_option("--angles", f.angles, "In-plane rotations over [0, pi)");
  cmd->add_option("--depths", f.depths, "Gripper depths");
  cmd->add_option("--depth-values", f.depth_values, "Gripper depths in meters")->delimiter(',');
  cmd->add_option("--mu-grid", f.mu_grid, "Friction coefficients for scoring")->delimiter(',');
  cmd->add_option("--threshold", f.threshold, "Quality cutoff T for actioness");
  cmd->add_option("--tau", f.tau, "Anchor-to-cloud distance for reasonable poses (m)");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

void add_intrinsics_flags(CLI::App* cmd, CameraIntrinsics& k) {
  cmd->add_option("--width", k.width, "Image width (px)");
  cmd->add_option("--height", k.height, "Image height (px)");
  cmd->add_option("--fx", k.fx);
  cmd->add_option("--fy", k.fy);
  cmd->add_option("--cx", k.cx);
  cmd->add_option("--cy", k.cy);
}

void emit(const json& report, const std::string& out) {
  if (out.empty()) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw IoError("cannot write " + out);
  f << report.dump(2) << '\n';
  if (!f) throw IoError("write failed: " + out);
}

ArticulatedAsset load_fused(const std::string& path) { return fuse_part_meshes(load_asset(path)); }

void log(const std::string& s) { std::cerr << s << '\n'; }

json report_json(const FilterReport& r) {
  return {{"counts",
           {{"input", r.input}, {"unreasonable", r.unreasonable}, {"unreachable", r.unreachable}, {"survivors", r.survivors}}},
          {"stage_ms", {{"project", r.project_ms}, {"reasonable", r.reasonable_ms}, {"collision", r.collision_ms}}},
          {"threads", r.threads}};
}

json metrics_json(const DepthMetrics& m) {
  json j = {{"rmse", m.rmse}, {"mae", m.mae}, {"rel", m.rel}, {"delta_1.05", m.delta_105},
            {"delta_1.10", m.delta_110}, {"delta_1.25", m.delta_125}, {"valid_pixels", m.valid_pixels}};
  if (m.epe) j["epe"] = *m.epe;
  return j;
}

// Gripper glyph: the collision boxes of each pose as one mesh.
TriMesh gripper_glyphs(const std::vector<PoseCandidate>& poses, const GripperModel& gripper) {
  TriMesh out;
  for (const auto& c : poses) {
    const auto vol = GripperVolume::make(gripper, c.width);
    Rigid pose = Rigid::Identity();
    pose.linear() = c.rotation.toRotationMatrix();
    pose.translation() = c.translation;
    for (const auto& b : vol.boxes) {
      const TriMesh box = make_box(b.lo, b.hi).transformed(pose);
      const auto base = static_cast<std::uint32_t>(out.vertices.size());
      out.vertices.insert(out.vertices.end(), box.vertices.begin(), box.vertices.end());
      out.normals.insert(out.normals.end(), box.normals.begin(), box.normals.end());
      for (const auto& f : box.faces) out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    }
  }
  return out;
}

void write_archive_from(const ArticulatedAsset& asset, const RunSettings& settings, const std::string& out,
                        unsigned threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const Archive archive = run_pipeline(asset, settings, threads, log);
  write_archive(archive, out);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log("wrote " + out + " in " + std::to_string(s) + " s");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Part-level interaction pose annotation"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonFlags common;
  std::string out;

  auto* part_cmd = app.add_subcommand("annotate-part", "Sample and score interaction poses on parts");
  part_cmd->add_option("--asset", common.asset, "Asset description (JSON)")->required();
  part_cmd->add_option("--part", common.parts, "Part id (repeatable; default all parts)");
  part_cmd->add_option("--out", out, "Archive directory")->required();
  add_sampling_flags(part_cmd, common);

  RunSettings scene_settings;
  std::string replay;
  auto* scene_cmd = app.add_subcommand("annotate-scene", "Annotate parts, render scenes and label actioness");
  scene_cmd->add_option("--asset", common.asset, "Asset description (JSON)");
  scene_cmd->add_option("--part", common.parts, "Part id (repeatable; default all parts)");
  scene_cmd->add_option("--out", out, "Archive directory")->required();
  scene_cmd->add_option("--scenes", scene_settings.scene_configs, "Joint configurations")->default_val(1);
  scene_cmd->add_option("--object-views", scene_settings.object_views, "Object-centric views per configuration");
  scene_cmd->add_option("--part-views", scene_settings.part_views, "Part-centric views per configuration");
  scene_cmd->add_option("--ground", scene_settings.ground_height, "Ground plane height (m)");
  scene_cmd->add_option("--replay", replay, "Re-run the settings stored in an archive manifest");
  add_intrinsics_flags(scene_cmd, scene_settings.intrinsics);
  add_sampling_flags(scene_cmd, common);

  std::string kind = "object";
  std::uint32_t config_index = 0, view_index = 0;
  CameraIntrinsics render_k;
  double render_ground = 0.0;
  auto* render_cmd = app.add_subcommand("render-depth", "Render one seeded view to depth PNG, sidecar and cloud");
  render_cmd->add_option("--asset", common.asset)->required();
  render_cmd->add_option("--out", out, "Output directory")->required();
  render_cmd->add_option("--seed", common.seed);
  render_cmd->add_option("--config-index", config_index);
  render_cmd->add_option("--view-index", view_index);
  render_cmd->add_option("--kind", kind)->check(CLI::IsMember({"object", "part"}));
  render_cmd->add_option("--part", common.parts, "Target part for part-centric views");
  render_cmd->add_option("--ground", render_ground);
  render_cmd->add_option("--threads", common.threads);
  add_intrinsics_flags(render_cmd, render_k);

  std::string est, gt;
  bool disparity = false;
  double baseline = 0.055, depth_fx = CameraIntrinsics{}.fx;
  auto* depth_cmd = app.add_subcommand("eval-depth", "Depth / disparity error metrics");
  depth_cmd->add_option("--est", est, "Estimated depth PNG")->required();
  depth_cmd->add_option("--gt", gt, "Ground-truth depth PNG")->required();
  depth_cmd->add_flag("--disparity", disparity, "Also report EPE on disparities fx * baseline / depth");
  depth_cmd->add_option("--baseline", baseline, "Stereo baseline (m)");
  depth_cmd->add_option("--fx", depth_fx, "Focal length (px)");
  depth_cmd->add_option("--report", out, "Write JSON here instead of stdout");

  std::string archive_dir;
  std::vector<double> eval_mu = kDefaultPrecisionGrid;
  auto* poses_cmd = app.add_subcommand("eval-poses", "Precision of stored poses under friction");
  poses_cmd->add_option("--poses", archive_dir, "Archive directory")->required();
  poses_cmd->add_option("--asset", common.asset)->required();
  poses_cmd->add_option("--part", common.parts);
  poses_cmd->add_option("--mu-grid", eval_mu)->delimiter(',');
  poses_cmd->add_option("--threads", common.threads);
  poses_cmd->add_option("--report", out);

  std::size_t bench_points = 50000;
  std::size_t naive_scale = 0;
  std::string bench_part = "door_handle";
  auto* bench_cmd = app.add_subcommand("bench-filter", "Filter a synthetic cabinet workload and report timings");
  bench_cmd->add_option("--threads", common.threads);
  bench_cmd->add_option("--points", bench_points, "Scene points");
  bench_cmd->add_option("--n", common.n);
  bench_cmd->add_option("--views", common.views);
  bench_cmd->add_option("--angles", common.angles);
  bench_cmd->add_option("--depths", common.depths);
  bench_cmd->add_option("--tau", common.tau);
  bench_cmd->add_option("--seed", common.seed);
  bench_cmd->add_option("--part", bench_part, "Target part of the demo cabinet");
  bench_cmd->add_option("--naive-scale", naive_scale,
                        "Also time the naive filter on a workload scaled down by this factor (0 = skip)");
  bench_cmd->add_option("--report", out);

  std::size_t limit = 200;
  double min_quality = 0.0;
  bool free_only = false;
  auto* export_cmd = app.add_subcommand("export-poses", "Write gripper glyphs of stored poses as a mesh");
  export_cmd->add_option("--poses", archive_dir, "Archive directory")->required();
  export_cmd->add_option("--part", common.parts)->required();
  export_cmd->add_option("--out", out, "Mesh file (.obj or .ply)")->required();
  export_cmd->add_option("--limit", limit, "Maximum number of glyphs");
  export_cmd->add_option("--min-quality", min_quality);
  export_cmd->add_flag("--collision-free", free_only, "Only collision-free poses");

  auto* demo_cmd = app.add_subcommand("make-demo-asset", "Write the demo cabinet asset");
  demo_cmd->add_option("--out", out, "Directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*part_cmd) {
      RunSettings s = common.settings();
      s.scene_configs = 0;
      write_archive_from(load_fused(common.asset), s, out, common.threads);
    } else if (*scene_cmd) {
      RunSettings s;
      if (!replay.empty()) {
        s = read_run_settings(replay);
      } else {
        if (common.asset.empty()) throw ValidationError("--asset is required unless --replay is given");
        s = common.settings();
        s.scene_configs = scene_settings.scene_configs;
        s.object_views = scene_settings.object_views;
        s.part_views = scene_settings.part_views;
        s.ground_height = scene_settings.ground_height;
        s.intrinsics = scene_settings.intrinsics;
      }
      s.intrinsics.validate();
      write_archive_from(load_fused(s.asset_path), s, out, common.threads);
    } else if (*render_cmd) {
      render_k.validate();
      const auto asset = load_fused(common.asset);
      const JointConfig config = randomize_joints(asset, derive_seed(common.seed, Stage::kJointConfig, config_index));
      const KinematicState state = forward_kinematics(asset, config);
      CameraPose cam;
      if (kind == "object") {
        cam = sample_camera_object_centric(world_bounds(asset, state),
                                           derive_seed(common.seed, Stage::kObjectCamera, view_index), render_k);
      } else {
        if (common.parts.size() != 1) throw ValidationError("part-centric rendering needs exactly one --part");
        const auto p = asset.part_index(common.parts.front());
        cam = sample_camera_part_centric(state.parts[p], asset.parts[p].fused_mesh->bounds(),
                                         derive_seed(common.seed, Stage::kPartCamera, view_index), render_k);
      }
      const SceneSample sample = raycast_depth(asset, config, cam, render_k, render_ground, common.threads);
      std::error_code ec;
      fs::create_directories(out, ec);
      if (ec) throw IoError("cannot create " + out + ": " + ec.message());
      write_depth_png(fs::path(out) / "depth.png", sample.depth, render_k.width, render_k.height);
      write_camera_json(fs::path(out) / "depth.json", render_k, cam);
      write_cloud_ply(fs::path(out) / "cloud.ply", sample.cloud, sample.labels);
      log("rendered " + std::to_string(sample.cloud.size()) + " points to " + out);
    } else if (*depth_cmd) {
      int we = 0, he = 0, wg = 0, hg = 0;
      DepthPair pair;
      pair.estimate = read_depth_png(est, &we, &he);
      pair.truth = read_depth_png(gt, &wg, &hg);
      if (we != wg || he != hg) throw ValidationError("depth images differ in size");
      if (disparity) {
        pair.estimate_disparity = depth_to_disparity(pair.estimate, depth_fx, baseline);
        pair.truth_disparity = depth_to_disparity(pair.truth, depth_fx, baseline);
      }
      emit(metrics_json(depth_metrics(pair)), out);
    } else if (*poses_cmd) {
      const auto asset = load_fused(common.asset);
      const Archive archive = read_archive(archive_dir);
      json report = json::object();
      for (const auto& t : archive.parts) {
        if (!common.parts.empty() && std::find(common.parts.begin(), common.parts.end(), t.part_id) == common.parts.end())
          continue;
        std::vector<PoseCandidate> poses;
        poses.reserve(t.records.size());
        for (const auto& r : t.records) poses.push_back(r.candidate());
        const TriangleBvh bvh(*asset.parts[asset.part_index(t.part_id)].fused_mesh);
        const auto r = precision_at_mu(poses, bvh, archive.settings.gripper, eval_mu, common.threads);
        json per = json::object();
        for (std::size_t k = 0; k < r.mu.size(); ++k) {
          char key[32];
          std::snprintf(key, sizeof key, "%g", r.mu[k]);
          per[key] = {{"n_success", r.n_success[k]}, {"precision", r.precision[k]}};
        }
        report[t.part_id] = {{"n_grasp", r.n_grasp}, {"per_mu", per}, {"P", r.mean_precision}};
      }
      emit(report, out);
    } else if (*bench_cmd) {
      const auto asset = fuse_part_meshes(make_demo_cabinet());
      SamplingConfig cfg;
      cfg.n = common.n;
      cfg.views = common.views;
      cfg.angles = common.angles;
      cfg.depths = common.depths;
      if (cfg.depths != cfg.depth_values.size()) {
        cfg.depth_values.clear();
        for (std::uint32_t d = 0; d < cfg.depths; ++d) cfg.depth_values.push_back(0.01 * (d + 1));
      }
      cfg.validate();
      FilterWorkload w = make_filter_workload(asset, bench_part, bench_points, cfg, common.seed);
      FilterReport r = filter_batch(w.candidates, w.scene, w.gripper, w.target, common.tau, common.threads);
      json report = report_json(r);
      report["points"] = w.scene.points.size();
      if (naive_scale > 0) {
        cfg.n = std::max<std::uint32_t>(1, cfg.n / static_cast<std::uint32_t>(naive_scale));
        FilterWorkload small =
            make_filter_workload(asset, bench_part, std::max<std::size_t>(1, bench_points / naive_scale), cfg, common.seed);
        auto t0 = std::chrono::steady_clock::now();
        filter_unreasonable_naive(small.candidates, small.scene, common.tau);
        filter_collisions_naive(small.candidates, small.scene, small.gripper, small.target);
        const double naive_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const FilterReport fast = filter_batch(small.candidates, small.scene, small.gripper, small.target, common.tau, 1);
        const double fast_ms = fast.reasonable_ms + fast.collision_ms;
        report["naive"] = {{"scale", naive_scale},
                           {"candidates", small.candidates.size()},
                           {"points", small.scene.points.size()},
                           {"naive_ms", naive_ms},
                           {"batch_single_thread_ms", fast_ms},
                           {"speedup", naive_ms / std::max(fast_ms, 1e-9)}};
      }
      emit(report, out);
    } else if (*export_cmd) {
      const Archive archive = read_archive(archive_dir);
      const auto& id = common.parts.front();
      auto it = std::find_if(archive.parts.begin(), archive.parts.end(), [&](const PartTable& t) { return t.part_id == id; });
      if (it == archive.parts.end()) throw ValidationError("archive has no part '" + id + "'");
      std::vector<PoseCandidate> poses;
      for (const auto& r : it->records) {
        if (r.quality < min_quality || (free_only && !r.collision_free)) continue;
        poses.push_back(r.candidate());
      }
      std::stable_sort(poses.begin(), poses.end(),
                       [](const PoseCandidate& a, const PoseCandidate& b) { return a.quality > b.quality; });
      if (poses.size() > limit) poses.resize(limit);
      write_mesh(out, gripper_glyphs(poses, archive.settings.gripper));
      log("wrote " + std::to_string(poses.size()) + " glyphs to " + out);
    } else if (*demo_cmd) {
      save_asset(make_demo_cabinet(), out);
      log("wrote " + (fs::path(out) / "asset.json").string());
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
