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

#include <optional>
#include <span>
#include <vector>

#include "partpose/antipodal.hpp"
#include "partpose/common.hpp"
#include "partpose/sampling.hpp"

namespace partpose {

/// Per-pixel depth maps (meters). Pixels with truth <= 0 are ignored.
struct DepthPair {
  std::vector<double> estimate;
  std::vector<double> truth;
  // Disparity maps (pixels), used only for EPE.
  std::optional<std::vector<double>> estimate_disparity;
  std::optional<std::vector<double>> truth_disparity;
};

struct DepthMetrics {
  std::optional<double> epe;  // px
  double rmse = 0.0;          // m
  double mae = 0.0;           // m
  double rel = 0.0;
  double delta_105 = 0.0;  // percent of pixels with max(d/t, t/d) < 1.05
  double delta_110 = 0.0;
  double delta_125 = 0.0;
  std::size_t valid_pixels = 0;
};

/// Throws ValidationError on size mismatch or when no pixel is valid.
DepthMetrics depth_metrics(const DepthPair& pair);

/// Disparity fx * baseline / depth; 0 where depth <= 0.
std::vector<double> depth_to_disparity(std::span<const double> depth, double fx, double baseline);

inline const std::vector<double> kDefaultPrecisionGrid{0.2, 0.4, 0.6, 0.8, 1.0, 1.2};

struct PrecisionReport {
  std::size_t n_grasp = 0;
  std::vector<double> mu;
  std::vector<std::size_t> n_success;
  std::vector<double> precision;
  double mean_precision = 0.0;  // P: mean of precision over the grid
};

/// A pose succeeds at mu when it is collision-free and the contacts found
/// with the gripper fully open are antipodal at mu. Throws on an empty set.
PrecisionReport precision_at_mu(std::span<const PoseCandidate> poses, const TriangleBvh& mesh,
                                const GripperModel& gripper, const std::vector<double>& mu_grid = kDefaultPrecisionGrid,
                                unsigned threads = 0);

}  // namespace partpose
