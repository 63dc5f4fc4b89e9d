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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "partpose/actioness.hpp"
#include "partpose/archive.hpp"
#include "partpose/asset.hpp"
#include "partpose/filtering.hpp"
#include "partpose/sampling.hpp"
#include "partpose/scene.hpp"

namespace partpose {

inline constexpr const char* kToolVersion = "0.1.0";

/// Part-level annotation in the owning link's frame.
struct PartAnnotation {
  std::size_t part_index = 0;
  std::string part_id;
  std::vector<SurfacePoint> anchors;
  std::vector<PoseCandidate> candidates;  // N blocks of V*A*D, scored
  double sample_ms = 0.0;
  double score_ms = 0.0;
  double collision_ms = 0.0;
};

/// FPS, pose grid, antipodal scoring and a self-collision pass against dense
/// samples of the part surface. Requires a fused asset.
PartAnnotation annotate_part(const ArticulatedAsset& asset, std::size_t part, const RunSettings& settings,
                             unsigned threads = 0);

struct ViewAnnotation {
  SceneSample sample;
  CameraKind kind = CameraKind::kObjectCentric;
  std::string target_part;
  std::uint32_t config_index = 0;
  ActionessLabels labels;
  std::vector<FilterCounts> filters;
  std::vector<FilterReport> reports;
};

/// Renders one view, filters every annotated part's poses in it and labels
/// the cloud.
ViewAnnotation annotate_view(const ArticulatedAsset& asset, std::span<const PartAnnotation> parts,
                             const JointConfig& config, const CameraPose& camera, CameraKind kind,
                             const RunSettings& settings, unsigned threads = 0);

/// Part indices selected by the settings (all parts when the list is empty).
std::vector<std::size_t> selected_parts(const ArticulatedAsset& asset, const RunSettings& settings);

using Progress = std::function<void(const std::string&)>;

/// Full run: part annotation, then scene_configs joint configurations with
/// object_views + part_views cameras each. Every random draw comes from a
/// seed derived from settings.root_seed, so the result does not depend on
/// `threads`.
Archive run_pipeline(const ArticulatedAsset& asset, const RunSettings& settings, unsigned threads = 0,
                     const Progress& progress = {});

}  // namespace partpose
