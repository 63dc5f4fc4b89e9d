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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here, not taken from the command line.

#include <chrono>
#include <cstdio>
#include <functional>
#include <thread>
#include <string>
#include <vector>

#include "partpose/actioness.hpp"
#include "partpose/antipodal.hpp"
#include "partpose/archive.hpp"
#include "partpose/filtering.hpp"
#include "partpose/metrics.hpp"
#include "partpose/pipeline.hpp"
#include "partpose/scene.hpp"
#include "partpose/seed.hpp"
#include "test_util.hpp"

using namespace partpose;
using partpose::testing::read_text;
using partpose::testing::TempDir;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kGridCandidates = 1572864;
constexpr double kPartBudgetSeconds = 60.0;
constexpr double kFilterBudgetSeconds = 10.0;
constexpr unsigned kFilterThreads = 8;
constexpr double kMinSpeedup = 10.0;
constexpr std::size_t kNaiveScale = 16;
constexpr int kFilterScenes = 20;
constexpr int kActionessSets = 100;
constexpr double kScoreTolerance = 1e-9;
constexpr double kMetricTolerance = 1e-6;
constexpr int kRandomDepthPairs = 1000;
constexpr int kRandomizationDraws = 10000;
constexpr double kJointMeanSlack = 0.02;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome grid_cardinality() {
  RunSettings settings;
  const auto asset = partpose::testing::single_part_asset(partpose::testing::dense_handle_mesh());
  const std::size_t tris = asset.parts[0].fused_mesh->faces.size();
  TempDir dir("accept_grid");
  const auto t0 = std::chrono::steady_clock::now();
  const PartAnnotation p = annotate_part(asset, 0, settings);
  Archive a;
  a.asset_id = asset.id;
  a.tool_version = kToolVersion;
  a.settings = settings;
  PartTable t{p.part_id, {}};
  t.records.reserve(p.candidates.size());
  for (const auto& c : p.candidates) t.records.push_back(PoseRecord::from(c));
  a.parts.push_back(std::move(t));
  write_archive(a, dir / "out");
  const double secs = seconds_since(t0);
  const std::size_t stored = fs::file_size(dir / "out/parts/handle.poses");
  const bool ok = p.candidates.size() == kGridCandidates &&
                  stored == kPoseHeaderSize + kGridCandidates * kPoseRecordSize && tris >= 10000 &&
                  secs <= kPartBudgetSeconds;
  return {ok, fmt("%zu candidates (expected %zu) on a %zu-triangle part in %.1f s (limit %.0f s)",
                  p.candidates.size(), kGridCandidates, tris, secs, kPartBudgetSeconds)};
}

Outcome antipodal_oracle() {
  const FrictionGrid grid;
  const GripperModel g;
  int matched = 0, total = 0;
  bool in_range = true;
  for (double deg : {0.0, 15.0, 30.0, 45.0, 60.0}) {
    const TriMesh wedge = partpose::testing::make_wedge(deg2rad(deg));
    const auto c = find_contacts(partpose::testing::make_candidate(Vec3(-0.005, 0, 0), Quat::Identity(), 0.02),
                                 wedge, g);
    ++total;
    if (!c) continue;
    const double q = antipodal_quality(c->pair, grid);
    in_range = in_range && q >= 0.0 && q <= kMaxQuality;
    // Brute-force cone test: smallest mu whose half-angle covers both normals.
    double expect = 0.0;
    for (double mu : grid.mu_values) {
      const double half = std::atan(mu);
      const double d1 = std::acos(std::clamp(c->pair.n1.dot(c->pair.closing), -1.0, 1.0));
      const double d2 = std::acos(std::clamp(-c->pair.n2.dot(c->pair.closing), -1.0, 1.0));
      if (std::max(d1, d2) <= half + 1e-9 && std::tan(deg2rad(deg)) <= mu + 1e-12) {
        expect = 1.3 - mu;
        break;
      }
    }
    matched += std::abs(q - expect) < 1e-12;
  }
  return {matched == total && in_range, fmt("%d/%d wedges match the cone oracle, q in [0, 1.2]: %s", matched, total,
                                            in_range ? "yes" : "no")};
}

Outcome filter_equivalence() {
  int equal = 0;
  std::size_t max_points = 0, max_cands = 0;
  for (int s = 0; s < kFilterScenes; ++s) {
    Rng rng(derive_seed(2026, Stage::kBenchmark, static_cast<std::uint64_t>(s)));
    const std::size_t points = 500 + rng.below(4501);
    const std::size_t cands = 1000 + rng.below(9001);
    const auto r = partpose::testing::random_filter_case(rng.next(), points, cands);
    max_points = std::max(max_points, r.scene.points.size());
    max_cands = std::max(max_cands, r.candidates.size());
    const auto naive_c = filter_collisions_naive(r.candidates, r.scene, r.gripper, 0);
    const auto naive_r = filter_unreasonable_naive(r.candidates, r.scene, 0.005);
    CollisionOptions o;
    o.threads = 1 + static_cast<unsigned>(s % 8);
    const auto batch_c = filter_collisions(r.candidates, r.scene, r.gripper, 0, o);
    const auto batch_r = filter_unreasonable(r.candidates, r.scene, 0.005, o.threads);
    equal += batch_c == naive_c && batch_r == naive_r;
  }
  return {equal == kFilterScenes, fmt("%d/%d scenes flag-identical (up to %zu points, %zu candidates)", equal,
                                      kFilterScenes, max_points, max_cands)};
}

Outcome filter_performance() {
  const auto asset = fuse_part_meshes(make_demo_cabinet());
  SamplingConfig cfg;
  FilterWorkload w = make_filter_workload(asset, "door_handle", 50000, cfg, 0);
  const auto t0 = std::chrono::steady_clock::now();
  const FilterReport full = filter_batch(w.candidates, w.scene, w.gripper, w.target, 0.005, kFilterThreads);
  const double full_s = seconds_since(t0);

  cfg.n /= kNaiveScale;
  FilterWorkload small = make_filter_workload(asset, "door_handle", 50000 / kNaiveScale, cfg, 0);
  auto t1 = std::chrono::steady_clock::now();
  const auto nr = filter_unreasonable_naive(small.candidates, small.scene, 0.005);
  const auto nc = filter_collisions_naive(small.candidates, small.scene, small.gripper, small.target);
  const double naive_s = seconds_since(t1);
  auto copy = small.candidates;
  t1 = std::chrono::steady_clock::now();
  filter_batch(copy, small.scene, small.gripper, small.target, 0.005, 1);
  const double batch_s = seconds_since(t1);
  bool same = true;
  for (std::size_t i = 0; i < copy.size(); ++i)
    same = same && copy[i].reasonable == (nr[i] != 0) && copy[i].collision_free == (nc[i] != 0);
  const double speedup = naive_s / std::max(batch_s, 1e-9);
  const bool ok = w.candidates.size() == kGridCandidates && w.scene.points.size() == 50000 &&
                  full_s <= kFilterBudgetSeconds && speedup >= kMinSpeedup && same;
  return {ok, fmt("%zu candidates x %zu points in %.2f s with %u threads (limit %.0f s, %u hardware threads); "
                  "1/%zu scale: naive %.2f s, batch %.3f s single-threaded, %.1fx (need %.0fx)",
                  w.candidates.size(), w.scene.points.size(), full_s, kFilterThreads, kFilterBudgetSeconds,
                  std::thread::hardware_concurrency(), kNaiveScale, naive_s, batch_s, speedup, kMinSpeedup)
                  + (full.input == w.candidates.size() ? "" : "; report mismatch")};
}

Outcome actioness_identity() {
  int sets = 0;
  double worst_identity = 0.0, worst_brute = 0.0;
  bool monotone = true;
  for (int s = 0; s < kActionessSets; ++s) {
    Rng rng(derive_seed(11, Stage::kBenchmark, static_cast<std::uint64_t>(s)));
    ActionessConfig cfg;
    cfg.views = 1 + static_cast<std::uint32_t>(rng.below(16));
    cfg.poses_per_view = 1 + rng.below(48);
    cfg.threshold = rng.uniform(0.0, 1.2);
    const std::size_t n = 1 + rng.below(64);
    std::vector<std::uint8_t> act(n);
    for (auto& a : act) a = rng.uniform() < 0.7;
    std::vector<PoseCandidate> cands(n * cfg.views * cfg.poses_per_view);
    for (auto& c : cands) {
      c.quality = rng.uniform() < 0.3 ? 0.0 : 1.3 - 0.1 * static_cast<double>(1 + rng.below(12));
      c.collision_free = rng.uniform() < 0.6;
    }
    const auto out = compute_actioness(act, cands, cfg);
    for (std::size_t i = 0; i < n; ++i) {
      double mean = 0.0, brute = 0.0;
      for (std::uint32_t j = 0; j < cfg.views; ++j) {
        double view = 0.0;
        for (std::size_t k = 0; k < cfg.poses_per_view; ++k) {
          const auto& c = cands[(i * cfg.views + j) * cfg.poses_per_view + k];
          view += (c.quality > cfg.threshold) * c.collision_free;
        }
        const double sv = act[i] * view / static_cast<double>(cfg.poses_per_view);
        worst_brute = std::max(worst_brute, std::abs(sv - out.view_score(i, j)));
        brute += view;
        mean += out.view_score(i, j);
      }
      brute = act[i] * brute / static_cast<double>(cfg.views * cfg.poses_per_view);
      worst_brute = std::max(worst_brute, std::abs(brute - out.point_scores[i]));
      worst_identity = std::max(worst_identity, std::abs(mean / cfg.views - out.point_scores[i]));
    }
    ActionessConfig higher = cfg;
    higher.threshold = std::min(1.2, cfg.threshold + rng.uniform(0.0, 0.5));
    const auto out2 = compute_actioness(act, cands, higher);
    for (std::size_t i = 0; i < n; ++i) {
      monotone = monotone && out2.point_scores[i] <= out.point_scores[i];
      for (std::uint32_t j = 0; j < cfg.views; ++j) monotone = monotone && out2.view_score(i, j) <= out.view_score(i, j);
    }
    ++sets;
  }
  const bool ok = worst_identity <= kScoreTolerance && worst_brute <= kScoreTolerance && monotone;
  return {ok, fmt("%d sets: max |mean_j s^V - s^P| = %.1e, max brute-force diff = %.1e (tol %.0e), monotone in T: %s",
                  sets, worst_identity, worst_brute, kScoreTolerance, monotone ? "yes" : "no")};
}

Outcome metrics_golden() {
  int golden_ok = 0, golden = 0;
  auto near = [&](double a, double b) {
    ++golden;
    golden_ok += std::abs(a - b) <= kMetricTolerance;
  };
  {
    DepthPair p;
    p.truth = {1.0, 0.5, 2.0};
    p.estimate = p.truth;
    p.truth_disparity = depth_to_disparity(p.truth, 920.0, 0.055);
    p.estimate_disparity = p.truth_disparity;
    const auto m = depth_metrics(p);
    near(*m.epe, 0.0);
    near(m.rmse, 0.0);
    near(m.mae, 0.0);
    near(m.rel, 0.0);
    near(m.delta_105, 100.0);
    near(m.delta_110, 100.0);
    near(m.delta_125, 100.0);
  }
  {
    DepthPair p;
    p.truth.assign(64, 1.0);
    p.estimate.assign(64, 1.1);
    const auto m = depth_metrics(p);
    near(m.mae, 0.1);
    near(m.rmse, 0.1);
    near(m.rel, 0.1);
    near(m.delta_105, 0.0);
    near(m.delta_125, 100.0);
  }
  {
    DepthPair p;
    p.truth = {1.0, 1.0, 2.0, 2.0, 0.0};
    p.estimate = {1.0, 1.2, 2.0, 2.4, 3.0};
    p.truth_disparity = std::vector<double>{50.0, 25.0, 10.0, 5.0, 0.0};
    p.estimate_disparity = std::vector<double>{51.0, 26.0, 11.0, 6.0, 9.0};
    const auto m = depth_metrics(p);
    near(*m.epe, 1.0);
    near(m.mae, 0.15);
    near(m.rmse, std::sqrt(0.05));
    near(m.rel, 0.1);
    near(m.delta_105, 50.0);
    near(m.delta_110, 50.0);
    near(m.delta_125, 100.0);
  }
  Rng rng(23);
  int ordered = 0;
  for (int t = 0; t < kRandomDepthPairs; ++t) {
    DepthPair p;
    const auto n = 1 + rng.below(256);
    for (std::size_t i = 0; i < n; ++i) {
      const double truth = rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.2, 5.0);
      p.truth.push_back(truth);
      p.estimate.push_back(rng.uniform() < 0.05 ? 0.0 : truth * rng.uniform(0.6, 1.5));
    }
    p.truth[0] = rng.uniform(0.2, 5.0);
    const auto m = depth_metrics(p);
    ordered += m.delta_105 <= m.delta_110 && m.delta_110 <= m.delta_125 && m.rmse >= m.mae;
  }
  return {golden_ok == golden && ordered == kRandomDepthPairs,
          fmt("%d/%d golden values within %.0e; orderings hold on %d/%d random pairs", golden_ok, golden,
              kMetricTolerance, ordered, kRandomDepthPairs)};
}

Outcome randomization() {
  const CameraIntrinsics k;
  const Aabb object{Vec3(-0.4, -0.3, 0), Vec3(0, 0.3, 0.8)};
  const Aabb part{Vec3(-0.01, -0.06, -0.01), Vec3(0.01, 0.06, 0.01)};
  const Rigid pose = Rigid(Eigen::Translation3d(0.05, -0.1, 0.4) * Eigen::AngleAxisd(-0.6, Vec3::UnitZ()));
  int object_bad = 0, part_bad = 0;
  for (int s = 0; s < kRandomizationDraws; ++s) {
    const auto a = sample_camera_object_centric(object, derive_seed(1, Stage::kObjectCamera, s), k);
    Vec3 d = a.position - object.center();
    double lat = rad2deg(std::asin(d.z() / d.norm())), lon = rad2deg(std::atan2(d.y(), d.x()));
    object_bad += !(lat >= 10.0 - 1e-9 && lat <= 60.0 + 1e-9 && lon >= -60.0 - 1e-9 && lon <= 60.0 + 1e-9);
    const auto b = sample_camera_part_centric(pose, part, derive_seed(1, Stage::kPartCamera, s), k);
    d = pose.linear().transpose() * (b.position - pose * part.center());
    lat = rad2deg(std::asin(d.z() / d.norm()));
    lon = rad2deg(std::atan2(d.y(), d.x()));
    part_bad += !(lat >= -1e-9 && lat <= 60.0 + 1e-9 && lon >= -75.0 - 1e-9 && lon <= 75.0 + 1e-9);
  }
  // Uniformity of joint draws on each demo joint: mean within 2% of the
  // interval length around the midpoint.
  const auto cab = make_demo_cabinet();
  std::vector<double> sums(cab.joints.size(), 0.0);
  for (int s = 0; s < kRandomizationDraws; ++s) {
    const auto cfg = randomize_joints(cab, derive_seed(1, Stage::kJointConfig, s));
    for (std::size_t j = 0; j < sums.size(); ++j) sums[j] += cfg.values[j];
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < sums.size(); ++j) {
    const auto& jt = cab.joints[j];
    if (jt.kind == JointKind::kFixed) continue;
    const double mid = 0.5 * (jt.lower + jt.upper);
    worst = std::max(worst, std::abs(sums[j] / kRandomizationDraws - mid) / (jt.upper - jt.lower));
  }
  const bool ok = object_bad == 0 && part_bad == 0 && worst <= kJointMeanSlack;
  return {ok, fmt("%d draws: %d object-centric and %d part-centric range violations; worst joint mean offset %.2f%% "
                  "of range (limit %.0f%%)",
                  kRandomizationDraws, object_bad, part_bad, 100 * worst, 100 * kJointMeanSlack)};
}

Outcome determinism() {
  const auto asset = fuse_part_meshes(make_demo_cabinet());
  RunSettings s;
  s.root_seed = 31;
  s.sampling.n = 64;
  s.sampling.seed = s.root_seed;
  s.scene_configs = 2;
  s.object_views = 1;
  s.part_views = 1;
  s.intrinsics.width = 320;
  s.intrinsics.height = 240;
  s.intrinsics.fx = s.intrinsics.fy = 230.0;
  s.intrinsics.cx = 159.5;
  s.intrinsics.cy = 119.5;
  TempDir dir("accept_det");
  write_archive(run_pipeline(asset, s, 1), dir / "one");
  write_archive(run_pipeline(asset, s, 4), dir / "two");
  int files = 0, same = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "one")) {
    const auto ext = e.path().extension();
    if (!e.is_regular_file() || (ext != ".poses" && ext != ".bin")) continue;
    ++files;
    const auto rel = fs::relative(e.path(), dir / "one");
    same += fs::exists(dir / "two" / rel) && read_text(e.path()) == read_text(dir / "two" / rel);
  }
  const bool manifest_same = read_text(dir / "one/manifest.json") == read_text(dir / "two/manifest.json");
  return {files > 0 && same == files && manifest_same,
          fmt("%d/%d pose tables and actioness files byte-identical across 1 vs 4 threads; manifest identical: %s",
              same, files, manifest_same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"grid-cardinality", grid_cardinality},       {"antipodal-oracle", antipodal_oracle},
      {"filter-equivalence", filter_equivalence},   {"filter-performance", filter_performance},
      {"actioness-identity", actioness_identity},   {"metrics-golden", metrics_golden},
      {"camera-joint-randomization", randomization}, {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
