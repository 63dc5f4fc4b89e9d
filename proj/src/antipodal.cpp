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

#include "partpose/antipodal.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "partpose/parallel.hpp"

namespace partpose {

void FrictionGrid::validate() const {
  if (mu_values.empty()) throw ValidationError("friction grid is empty");
  for (std::size_t i = 0; i < mu_values.size(); ++i) {
    if (!(mu_values[i] > 0.0)) throw ValidationError("friction coefficients must be positive");
    if (i > 0 && !(mu_values[i] > mu_values[i - 1]))
      throw ValidationError("friction coefficients must be strictly increasing");
  }
}

namespace {

double angle_between(const Vec3& a, const Vec3& b) {
  // atan2 form stays accurate near 0 and pi.
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

double max_deviation(const ContactPair& pair) {
  return std::max(angle_between(pair.n1, pair.closing), angle_between(pair.n2, -pair.closing));
}

bool is_antipodal(const ContactPair& pair, double mu) {
  return max_deviation(pair) <= std::atan(mu) + kConeTolerance;
}

double antipodal_quality(const ContactPair& pair, const FrictionGrid& grid) {
  const double dev = max_deviation(pair);
  for (double mu : grid.mu_values) {
    if (dev <= std::atan(mu) + kConeTolerance) return std::clamp(kQualityOffset - mu, 0.0, kMaxQuality);
  }
  return 0.0;
}

std::optional<ContactResult> find_contacts(const PoseCandidate& candidate, const TriangleBvh& mesh,
                                           const GripperModel& gripper) {
  const Mat3 r = candidate.rotation.toRotationMatrix();
  const Vec3 ax = r.col(0), ay = r.col(1), az = r.col(2);
  const double w = candidate.width;
  const double half = 0.5 * w;
  const double x0 = (candidate.anchor - candidate.translation).dot(ax);
  const double d = 0.25 * gripper.finger_height;
  const std::array<std::array<double, 2>, 5> offsets{{{0, 0}, {-d, -d}, {-d, d}, {d, -d}, {d, d}}};

  std::optional<ContactResult> result;
  double worst = -1.0;
  double widest = 0.0;
  for (std::size_t o = 0; o < offsets.size(); ++o) {
    const double x = std::clamp(x0 + offsets[o][0], -gripper.finger_length, 0.0);
    const Vec3 line = candidate.translation + x * ax + offsets[o][1] * az;
    const auto left = mesh.intersect(line + half * ay, -ay, 0.0, w);
    if (!left) {
      if (o == 0) return std::nullopt;
      continue;
    }
    const auto right = mesh.intersect(line - half * ay, ay, 0.0, w);
    if (!right) {
      if (o == 0) return std::nullopt;
      continue;
    }
    // Both rays stopping at the same point means a finger started inside
    // the part; that is not a two-sided contact. The separation is then zero
    // up to rounding, so compare against a floor rather than 0.
    const double separation = w - left->t - right->t;
    if (!(separation > kMinSeparation)) {
      if (o == 0) return std::nullopt;
      continue;
    }
    ContactPair pair;
    pair.p1 = line + half * ay - left->t * ay;
    pair.p2 = line - half * ay + right->t * ay;
    pair.n1 = -left->normal;
    pair.n2 = -right->normal;
    pair.closing = -ay;
    const double dev = max_deviation(pair);
    widest = std::max(widest, separation);
    if (dev > worst) {
      worst = dev;
      result = ContactResult{pair, 0.0};
    }
  }
  result->width = std::min(widest + kWidthClearance, std::max(w, gripper.max_width));
  return result;
}

std::optional<ContactResult> find_contacts(const PoseCandidate& candidate, const TriMesh& mesh,
                                           const GripperModel& gripper) {
  const TriangleBvh bvh(mesh);
  return find_contacts(candidate, bvh, gripper);
}

void score_candidate(PoseCandidate& candidate, const TriangleBvh& mesh, const GripperModel& gripper,
                     const FrictionGrid& grid) {
  const auto contact = find_contacts(candidate, mesh, gripper);
  if (!contact) {
    candidate.quality = 0.0;
    return;
  }
  candidate.quality = antipodal_quality(contact->pair, grid);
  candidate.width = contact->width;
}

void score_candidates(std::span<PoseCandidate> candidates, const TriangleBvh& mesh, const GripperModel& gripper,
                      const FrictionGrid& grid, unsigned threads) {
  parallel_for(candidates.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) score_candidate(candidates[i], mesh, gripper, grid);
  });
}

void score_candidates(std::span<PoseCandidate> candidates, const TriMesh& mesh, const GripperModel& gripper,
                      const FrictionGrid& grid, unsigned threads) {
  if (candidates.empty()) return;
  const TriangleBvh bvh(mesh);
  score_candidates(candidates, bvh, gripper, grid, threads);
}

}  // namespace partpose
