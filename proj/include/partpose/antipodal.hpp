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

#include "partpose/bvh.hpp"
#include "partpose/common.hpp"
#include "partpose/sampling.hpp"

namespace partpose {

/// Friction coefficients tried in ascending order.
struct FrictionGrid {
  std::vector<double> mu_values{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
  void validate() const;
  bool operator==(const FrictionGrid&) const = default;
};

inline constexpr double kMaxQuality = 1.2;
/// q = kQualityOffset - mu_min.
inline constexpr double kQualityOffset = 1.3;
/// Angular slack on the friction-cone boundary (radians).
inline constexpr double kConeTolerance = 1e-9;
/// Added to the contact separation when the gripper width is tightened.
inline constexpr double kWidthClearance = 0.001;

/// Contacts closer than this along the closing line count as one point.
inline constexpr double kMinSeparation = 1e-6;

/// Contact 1 is touched by the finger on +Y (moving toward -Y), contact 2 by
/// the finger on -Y. `closing` points from contact 1 to contact 2.
struct ContactPair {
  Vec3 p1, p2;
  Vec3 n1, n2;  // inward unit normals
  Vec3 closing;
};

struct ContactResult {
  ContactPair pair;
  double width = 0.0;
};

/// Angle between each inward normal and the force its finger applies
/// (closing for contact 1, -closing for contact 2); the larger of the two.
double max_deviation(const ContactPair& pair);

bool is_antipodal(const ContactPair& pair, double mu);

/// 1.3 - mu_min over the grid, clamped to [0, 1.2]; 0 when no grid value works.
double antipodal_quality(const ContactPair& pair, const FrictionGrid& grid);

/// Casts closing rays at the pad center and four pad corners. The center
/// must touch on both sides at distinct points; corners that do not are
/// ignored. Returns the worst-deviation pair among the touching offsets and
/// the width tightened to the widest separation plus clearance.
std::optional<ContactResult> find_contacts(const PoseCandidate& candidate, const TriangleBvh& mesh,
                                           const GripperModel& gripper);
std::optional<ContactResult> find_contacts(const PoseCandidate& candidate, const TriMesh& mesh,
                                           const GripperModel& gripper);

/// Scores one candidate in place: quality and tightened width.
void score_candidate(PoseCandidate& candidate, const TriangleBvh& mesh, const GripperModel& gripper,
                     const FrictionGrid& grid);

/// Batch scoring, parallel over candidates; order and results identical to
/// calling score_candidate on each element.
void score_candidates(std::span<PoseCandidate> candidates, const TriangleBvh& mesh, const GripperModel& gripper,
                      const FrictionGrid& grid, unsigned threads = 0);
void score_candidates(std::span<PoseCandidate> candidates, const TriMesh& mesh, const GripperModel& gripper,
                      const FrictionGrid& grid, unsigned threads = 0);

}  // namespace partpose
