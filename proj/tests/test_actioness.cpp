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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "partpose/actioness.hpp"
#include "partpose/seed.hpp"
#include "test_util.hpp"

using namespace partpose;

namespace {

struct LabelSet {
  std::vector<std::uint8_t> actionable;
  std::vector<PoseCandidate> candidates;
  ActionessConfig config;
};

LabelSet random_set(std::uint64_t seed) {
  Rng rng(seed);
  LabelSet s;
  s.config.views = 1 + static_cast<std::uint32_t>(rng.below(8));
  s.config.poses_per_view = 1 + rng.below(12);
  s.config.threshold = rng.uniform(0.0, 1.2);
  const std::size_t n = rng.below(40);
  for (std::size_t i = 0; i < n; ++i) s.actionable.push_back(rng.uniform() < 0.7);
  s.candidates.resize(n * s.config.views * s.config.poses_per_view);
  for (auto& c : s.candidates) {
    // Quality lands on grid values so q == T ties happen.
    c.quality = rng.uniform() < 0.3 ? 0.0 : 1.3 - 0.1 * static_cast<double>(1 + rng.below(12));
    c.collision_free = rng.uniform() < 0.6;
  }
  return s;
}

// Direct transcription of the two sums, indexing poses by (i, j, k).
void brute_force(const LabelSet& s, std::vector<double>& sp, std::vector<double>& sv) {
  const std::size_t v = s.config.views, l = s.config.poses_per_view, n = s.actionable.size();
  sp.assign(n, 0.0);
  sv.assign(n * v, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      double view_num = 0.0;
      for (std::size_t k = 0; k < l; ++k) {
        const auto& c = s.candidates[i * v * l + j * l + k];
        const double ind = (c.quality > s.config.threshold ? 1.0 : 0.0) * (c.collision_free ? 1.0 : 0.0);
        num += ind;
        view_num += ind;
      }
      sv[i * v + j] = s.actionable[i] * view_num / static_cast<double>(l);
    }
    sp[i] = s.actionable[i] * num / static_cast<double>(v * l);
  }
}

}  // namespace

TEST_CASE("non-actionable points score zero") {
  ActionessConfig cfg;
  cfg.views = 3;
  cfg.poses_per_view = 4;
  std::vector<PoseCandidate> c(12);
  for (auto& p : c) p.quality = 1.2;
  const auto out = compute_actioness(std::vector<std::uint8_t>{0}, c, cfg, 1);
  CHECK(out.point_scores[0] == 0.0);
  for (std::uint32_t j = 0; j < 3; ++j) CHECK(out.view_score(0, j) == 0.0);
}

TEST_CASE("saturated point scores one everywhere") {
  ActionessConfig cfg;
  cfg.views = 3;
  cfg.poses_per_view = 4;
  std::vector<PoseCandidate> c(12);
  for (auto& p : c) p.quality = 1.2;
  const auto out = compute_actioness(std::vector<std::uint8_t>{1}, c, cfg, 1);
  CHECK(out.point_scores[0] == 1.0);
  for (std::uint32_t j = 0; j < 3; ++j) CHECK(out.view_score(0, j) == 1.0);
}

TEST_CASE("two views, three poses, counts {3, 0}") {
  ActionessConfig cfg;
  cfg.views = 2;
  cfg.poses_per_view = 3;
  std::vector<PoseCandidate> c(6);
  for (int k = 0; k < 3; ++k) c[k].quality = 1.0;
  for (int k = 3; k < 6; ++k) c[k].quality = 0.2;
  const auto out = compute_actioness(std::vector<std::uint8_t>{1}, c, cfg, 1);
  CHECK(out.view_score(0, 0) == 1.0);
  CHECK(out.view_score(0, 1) == 0.0);
  CHECK(out.point_scores[0] == 0.5);
}

TEST_CASE("colliding poses do not count") {
  ActionessConfig cfg;
  cfg.views = 1;
  cfg.poses_per_view = 4;
  std::vector<PoseCandidate> c(4);
  for (auto& p : c) p.quality = 1.2;
  c[1].collision_free = false;
  c[2].collision_free = false;
  CHECK(compute_actioness(std::vector<std::uint8_t>{1}, c, cfg, 1).point_scores[0] == 0.5);
}

TEST_CASE("block size mismatch is an error") {
  ActionessConfig cfg;
  cfg.views = 2;
  cfg.poses_per_view = 3;
  CHECK_THROWS_AS(compute_actioness(std::vector<std::uint8_t>{1, 0}, std::vector<PoseCandidate>(7), cfg, 1),
                  ValidationError);
  cfg.threshold = 1.5;
  CHECK_THROWS_AS(compute_actioness(std::vector<std::uint8_t>{1}, std::vector<PoseCandidate>(6), cfg, 1),
                  ValidationError);
}

TEST_CASE("identity, brute force and threshold monotonicity on random sets") {
  for (std::uint64_t s = 0; s < 150; ++s) {
    CAPTURE(s);
    LabelSet set = random_set(s);
    const auto out = compute_actioness(set.actionable, set.candidates, set.config, 1 + s % 4);
    std::vector<double> sp, sv;
    brute_force(set, sp, sv);
    for (std::size_t i = 0; i < out.size(); ++i) {
      double mean = 0.0;
      for (std::uint32_t j = 0; j < out.views; ++j) mean += out.view_score(i, j);
      mean /= out.views;
      CHECK(std::abs(mean - out.point_scores[i]) <= 1e-9);
      CHECK(std::abs(out.point_scores[i] - sp[i]) <= 1e-9);
      CHECK(out.point_scores[i] >= 0.0);
      CHECK(out.point_scores[i] <= 1.0);
      for (std::uint32_t j = 0; j < out.views; ++j) CHECK(std::abs(out.view_score(i, j) - sv[i * out.views + j]) <= 1e-9);
    }
    set.config.threshold = std::min(1.2, set.config.threshold + 0.25);
    const auto higher = compute_actioness(set.actionable, set.candidates, set.config, 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(higher.point_scores[i] <= out.point_scores[i]);
      for (std::uint32_t j = 0; j < out.views; ++j) CHECK(higher.view_score(i, j) <= out.view_score(i, j));
    }
  }
}

TEST_CASE("actionable labels follow part flags") {
  const auto cab = make_demo_cabinet();
  SceneSample s;
  s.labels = {kBackgroundLabel, 0, 1, 2, 3, 17};
  const auto c = assign_actionable_labels(s, cab);
  CHECK(c == std::vector<std::uint8_t>{0, 1, 1, 1, 1, 0});

  ArticulatedAsset none;
  none.links = {{"base", {}, {}}};
  CHECK(assign_actionable_labels(s, none) == std::vector<std::uint8_t>(6, 0));
}

TEST_CASE("scene points inherit the nearest same-part anchor within the radius") {
  SceneSample scene;
  scene.camera.position = Vec3::Zero();
  scene.camera.target = Vec3(0, 0, 1);
  scene.camera.up = Vec3(0, -1, 0);
  const Rigid cam = scene.camera.camera_to_world();
  const std::vector<Vec3> world{Vec3(0, 0, 1), Vec3(0.004, 0, 1), Vec3(0.5, 0, 1), Vec3(0, 0, 1), Vec3(0, 0, 1)};
  for (const auto& w : world) scene.cloud.push_back(cam.inverse() * w);
  scene.labels = {0, 0, 0, 1, 0};
  const std::vector<std::uint8_t> act{1, 1, 1, 1, 0};

  AnchorScores part;
  part.label = 0;
  part.anchors = {Vec3(0.001, 0, 1), Vec3(0.006, 0, 1)};
  part.scores.views = 2;
  part.scores.actionable = {1, 1};
  part.scores.point_scores = {0.25, 0.75};
  part.scores.view_scores = {0.5, 0.0, 1.0, 0.5};

  const auto out = transfer_actioness(scene, act, std::span(&part, 1), 2, kTransferRadius, 1);
  CHECK(out.point_scores == std::vector<double>{0.25, 0.75, 0.0, 0.0, 0.0});
  CHECK(out.view_score(1, 0) == 1.0);
  CHECK(out.view_score(1, 1) == 0.5);
  CHECK(out.view_score(0, 0) == 0.5);
  CHECK_THROWS_AS(transfer_actioness(scene, act, std::span(&part, 1), 3, kTransferRadius, 1), ValidationError);
}
