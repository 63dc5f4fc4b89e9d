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

#include "partpose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "partpose/parallel.hpp"

namespace partpose {

DepthMetrics depth_metrics(const DepthPair& pair) {
  const std::size_t n = pair.truth.size();
  if (pair.estimate.size() != n) throw ValidationError("depth maps differ in size");
  const bool disparity = pair.estimate_disparity.has_value() || pair.truth_disparity.has_value();
  if (disparity && (!pair.estimate_disparity || !pair.truth_disparity || pair.estimate_disparity->size() != n ||
                    pair.truth_disparity->size() != n))
    throw ValidationError("disparity maps missing or differ in size");

  DepthMetrics m;
  double sq = 0.0, abs = 0.0, rel = 0.0, epe = 0.0;
  std::size_t d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = pair.truth[i];
    if (!(t > 0.0)) continue;
    const double d = pair.estimate[i];
    const double err = d - t;
    ++m.valid_pixels;
    sq += err * err;
    abs += std::abs(err);
    rel += std::abs(err) / t;
    const double ratio = d > 0.0 ? std::max(d / t, t / d) : std::numeric_limits<double>::infinity();
    d1 += ratio < 1.05;
    d2 += ratio < 1.10;
    d3 += ratio < 1.25;
    if (disparity) epe += std::abs((*pair.estimate_disparity)[i] - (*pair.truth_disparity)[i]);
  }
  if (m.valid_pixels == 0) throw ValidationError("no valid ground-truth pixels");
  const double count = static_cast<double>(m.valid_pixels);
  m.rmse = std::sqrt(sq / count);
  m.mae = abs / count;
  m.rel = rel / count;
  m.delta_105 = 100.0 * static_cast<double>(d1) / count;
  m.delta_110 = 100.0 * static_cast<double>(d2) / count;
  m.delta_125 = 100.0 * static_cast<double>(d3) / count;
  if (disparity) m.epe = epe / count;
  return m;
}

std::vector<double> depth_to_disparity(std::span<const double> depth, double fx, double baseline) {
  std::vector<double> out(depth.size(), 0.0);
  for (std::size_t i = 0; i < depth.size(); ++i)
    if (depth[i] > 0.0) out[i] = fx * baseline / depth[i];
  return out;
}

PrecisionReport precision_at_mu(std::span<const PoseCandidate> poses, const TriangleBvh& mesh,
                                const GripperModel& gripper, const std::vector<double>& mu_grid, unsigned threads) {
  if (poses.empty()) throw ValidationError("empty pose set");
  if (mu_grid.empty()) throw ValidationError("empty friction grid");
  for (double mu : mu_grid)
    if (!(mu > 0.0)) throw ValidationError("friction coefficients must be positive");

  // Per pose: index of the first grid value (in ascending mu order) at which
  // it succeeds, or grid size when it never does.
  std::vector<double> sorted = mu_grid;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> first(poses.size(), sorted.size());
  parallel_for(poses.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (!poses[i].collision_free) continue;
      PoseCandidate open = poses[i];
      open.width = gripper.max_width;
      const auto contact = find_contacts(open, mesh, gripper);
      if (!contact) continue;
      for (std::size_t k = 0; k < sorted.size(); ++k)
        if (is_antipodal(contact->pair, sorted[k])) {
          first[i] = k;
          break;
        }
    }
  });

  PrecisionReport r;
  r.n_grasp = poses.size();
  r.mu = mu_grid;
  for (double mu : mu_grid) {
    const auto rank = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), mu) - sorted.begin());
    const auto n = static_cast<std::size_t>(std::count_if(first.begin(), first.end(), [&](std::size_t f) { return f <= rank; }));
    r.n_success.push_back(n);
    r.precision.push_back(static_cast<double>(n) / static_cast<double>(r.n_grasp));
    r.mean_precision += r.precision.back();
  }
  r.mean_precision /= static_cast<double>(mu_grid.size());
  return r;
}

}  // namespace partpose
