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

#include "partpose/actioness.hpp"

#include <limits>

#include "partpose/parallel.hpp"

namespace partpose {

void ActionessConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.2)) throw ValidationError("threshold must lie in [0, 1.2]");
  if (views == 0 || poses_per_view == 0) throw ValidationError("views and poses per view must be positive");
}

std::vector<std::uint8_t> assign_actionable_labels(const SceneSample& scene, const ArticulatedAsset& asset) {
  std::vector<std::uint8_t> out(scene.labels.size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto l = scene.labels[i];
    if (l >= 0 && static_cast<std::size_t>(l) < asset.parts.size() && asset.parts[l].actionable) out[i] = 1;
  }
  return out;
}

ActionessLabels compute_actioness(std::span<const std::uint8_t> actionable, std::span<const PoseCandidate> candidates,
                                  const ActionessConfig& config, unsigned threads) {
  config.validate();
  const std::size_t n = actionable.size();
  const std::size_t v = config.views, l = config.poses_per_view;
  if (candidates.size() != n * v * l)
    throw ValidationError("candidate count " + std::to_string(candidates.size()) + " does not match " +
                          std::to_string(n) + " points x " + std::to_string(v * l) + " poses");
  ActionessLabels out;
  out.actionable.assign(actionable.begin(), actionable.end());
  out.views = config.views;
  out.point_scores.assign(n, 0.0);
  out.view_scores.assign(n * v, 0.0);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (!actionable[i]) continue;
      std::size_t total = 0;
      for (std::size_t j = 0; j < v; ++j) {
        std::size_t count = 0;
        const auto* block = &candidates[(i * v + j) * l];
        for (std::size_t k = 0; k < l; ++k)
          if (block[k].quality > config.threshold && block[k].collision_free) ++count;
        out.view_scores[i * v + j] = static_cast<double>(count) / static_cast<double>(l);
        total += count;
      }
      out.point_scores[i] = static_cast<double>(total) / static_cast<double>(v * l);
    }
  });
  return out;
}

ActionessLabels transfer_actioness(const SceneSample& scene, std::span<const std::uint8_t> actionable,
                                   std::span<const AnchorScores> parts, std::uint32_t views, double radius,
                                   unsigned threads) {
  const std::size_t n = scene.cloud.size();
  if (actionable.size() != n || scene.labels.size() != n)
    throw ValidationError("actionable labels do not match the cloud");
  for (const auto& p : parts)
    if (p.scores.views != views || p.scores.size() != p.anchors.size())
      throw ValidationError("anchor scores do not match anchors or view count");
  ActionessLabels out;
  out.actionable.assign(actionable.begin(), actionable.end());
  out.views = views;
  out.point_scores.assign(n, 0.0);
  out.view_scores.assign(n * views, 0.0);
  const Rigid cam = scene.camera.camera_to_world();
  const double r2 = radius * radius;
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (!actionable[i]) continue;
      const AnchorScores* part = nullptr;
      for (const auto& p : parts)
        if (p.label == scene.labels[i]) part = &p;
      if (!part) continue;
      const Vec3 w = cam * scene.cloud[i];
      std::size_t best = part->anchors.size();
      double best_d2 = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < part->anchors.size(); ++a) {
        const double d2 = (part->anchors[a] - w).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = a;
        }
      }
      if (best == part->anchors.size() || best_d2 > r2) continue;
      out.point_scores[i] = part->scores.point_scores[best];
      for (std::uint32_t j = 0; j < views; ++j) out.view_scores[i * views + j] = part->scores.view_score(best, j);
    }
  });
  return out;
}

}  // namespace partpose
