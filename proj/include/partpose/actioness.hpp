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
#include <span>
#include <vector>

#include "partpose/asset.hpp"
#include "partpose/common.hpp"
#include "partpose/sampling.hpp"
#include "partpose/scene.hpp"

namespace partpose {

struct ActionessConfig {
  double threshold = 0.5;           // quality cutoff T
  std::uint32_t views = 64;         // V
  std::size_t poses_per_view = 48;  // L = A * D

  static ActionessConfig from(const SamplingConfig& sampling, double threshold = 0.5) {
    return {threshold, sampling.views, sampling.poses_per_view()};
  }
  void validate() const;
};

/// Point-wise scores s^P (one per point) and view-wise scores s^V
/// (points x views, row-major).
struct ActionessLabels {
  std::vector<std::uint8_t> actionable;  // c_act
  std::uint32_t views = 0;
  std::vector<double> point_scores;
  std::vector<double> view_scores;

  std::size_t size() const { return point_scores.size(); }
  double view_score(std::size_t i, std::size_t j) const { return view_scores[i * views + j]; }
  bool operator==(const ActionessLabels&) const = default;
};

/// c_act per cloud point: 1 iff the point's label is a part marked actionable.
std::vector<std::uint8_t> assign_actionable_labels(const SceneSample& scene, const ArticulatedAsset& asset);

/// Candidates hold one V*L block per point, ordered (view, angle, depth).
/// A pose counts when q > T and it is collision-free:
///   s^V_ij = c_act_i / L     * sum_k 1(q > T) c
///   s^P_i  = c_act_i / (V L) * sum_jk 1(q > T) c
/// Throws ValidationError when the candidate count is not points * V * L.
ActionessLabels compute_actioness(std::span<const std::uint8_t> actionable, std::span<const PoseCandidate> candidates,
                                  const ActionessConfig& config, unsigned threads = 0);

/// Scores of one part's anchors together with their world positions.
struct AnchorScores {
  std::int32_t label = kBackgroundLabel;
  std::vector<Vec3> anchors;  // world frame
  ActionessLabels scores;
};

/// Max distance from a cloud point to the anchor whose scores it inherits.
inline constexpr double kTransferRadius = 0.01;

/// Scene-level labels: every cloud point takes the scores of the nearest
/// anchor of its own part within `radius` (0 if none), times its own c_act.
ActionessLabels transfer_actioness(const SceneSample& scene, std::span<const std::uint8_t> actionable,
                                   std::span<const AnchorScores> parts, std::uint32_t views,
                                   double radius = kTransferRadius, unsigned threads = 0);

}  // namespace partpose
