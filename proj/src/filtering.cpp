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

#include "partpose/filtering.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include "partpose/parallel.hpp"

namespace partpose {

namespace {

// Padding for conservative culling; far above accumulated rounding error at
// meter scale, far below any gripper dimension.
constexpr double kCullPad = 1e-7;

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Gripper axes in world frame. Both the batched and the reference path map
// points through local_*() below, written out as scalar expressions so that
// the two produce bit-identical coordinates (the library is built with
// -ffp-contract=off).
struct Frame {
  Vec3 ex, ey, ez, t;

  static Frame of(const PoseCandidate& c) {
    const Mat3 r = c.rotation.toRotationMatrix();
    return {r.col(0), r.col(1), r.col(2), c.translation};
  }
};

inline double dot3(double dx, double dy, double dz, const Vec3& e) { return dx * e.x() + dy * e.y() + dz * e.z(); }

inline Vec3 local_point(const Frame& f, const Vec3& p) {
  const double dx = p.x() - f.t.x(), dy = p.y() - f.t.y(), dz = p.z() - f.t.z();
  return {dot3(dx, dy, dz, f.ex), dot3(dx, dy, dz, f.ey), dot3(dx, dy, dz, f.ez)};
}

inline bool local_hits(const Vec3& q, const GripperVolume& vol, bool exempt_closing) {
  for (const auto& b : vol.boxes)
    if (b.contains(q)) return true;
  return !exempt_closing && vol.closing_region.contains(q);
}

bool below_ground(const Frame& f, const GripperVolume& vol, double ground) {
  const double az = f.ex.z(), bz = f.ey.z(), cz = f.ez.z();
  for (const auto& b : vol.boxes) {
    const double low = f.t.z() + std::min(az * b.lo.x(), az * b.hi.x()) + std::min(bz * b.lo.y(), bz * b.hi.y()) +
                       std::min(cz * b.lo.z(), cz * b.hi.z());
    if (low < ground) return true;
  }
  return false;
}

// Extents of the union of all boxes (closing region included) in the gripper frame.
struct VolumeExtent {
  double x_lo, x_hi, z_lo, z_hi, radius;
};

VolumeExtent extent_of(const GripperVolume& vol) {
  VolumeExtent e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
  auto take = [&](const Box& b) {
    e.x_lo = std::min(e.x_lo, b.lo.x());
    e.x_hi = std::max(e.x_hi, b.hi.x());
    e.z_lo = std::min(e.z_lo, b.lo.z());
    e.z_hi = std::max(e.z_hi, b.hi.z());
    const double y = std::max(std::abs(b.lo.y()), std::abs(b.hi.y()));
    const double z = std::max(std::abs(b.lo.z()), std::abs(b.hi.z()));
    e.radius = std::max(e.radius, std::hypot(y, z));
  };
  for (const auto& b : vol.boxes) take(b);
  take(vol.closing_region);
  return e;
}

// Dense voxel grid over the points that fall inside a region of interest.
class PointGrid {
 public:
  PointGrid(const CollisionScene& scene, const Aabb& roi, double cell) {
    if (roi.empty()) return;
    lo_ = roi.lo;
    cell_ = cell;
    for (;;) {
      std::size_t total = 1;
      for (int k = 0; k < 3; ++k) {
        dims_[k] = static_cast<std::int64_t>(std::floor((roi.hi[k] - roi.lo[k]) / cell_)) + 1;
        total *= static_cast<std::size_t>(dims_[k]);
      }
      if (total <= (std::size_t{1} << 24)) break;
      cell_ *= 2.0;
    }
    const std::size_t ncell = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
    std::vector<std::uint32_t> cell_of(scene.points.size(), kOutside);
    start_.assign(ncell + 1, 0);
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
      const Vec3& p = scene.points[i];
      if ((p.array() < roi.lo.array()).any() || (p.array() > roi.hi.array()).any()) continue;
      std::int64_t c[3];
      for (int k = 0; k < 3; ++k)
        c[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>((p[k] - lo_[k]) / cell_), 0, dims_[k] - 1);
      cell_of[i] = static_cast<std::uint32_t>((c[2] * dims_[1] + c[1]) * dims_[0] + c[0]);
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < ncell; ++c) start_[c + 1] += start_[c];
    points_.resize(start_[ncell]);
    labels_.resize(start_[ncell]);
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
      if (cell_of[i] == kOutside) continue;
      const auto slot = fill[cell_of[i]]++;
      points_[slot] = scene.points[i];
      labels_[slot] = scene.labels[i];
    }
  }

  /// Calls fn(point, label) for every stored point in cells that overlap
  /// [lo, hi] and pass keep(cell_center, cell_half_diagonal).
  template <typename Keep, typename Fn>
  void visit(const Vec3& lo, const Vec3& hi, Keep&& keep, Fn&& fn) const {
    if (points_.empty()) return;
    std::int64_t a[3], b[3];
    for (int k = 0; k < 3; ++k) {
      const double fa = std::floor((lo[k] - lo_[k]) / cell_);
      const double fb = std::floor((hi[k] - lo_[k]) / cell_);
      if (fb < 0.0 || fa > static_cast<double>(dims_[k] - 1)) return;
      a[k] = std::max<std::int64_t>(0, static_cast<std::int64_t>(fa));
      b[k] = std::min<std::int64_t>(dims_[k] - 1, static_cast<std::int64_t>(fb));
    }
    const double half_diag = 0.5 * std::sqrt(3.0) * cell_;
    for (std::int64_t z = a[2]; z <= b[2]; ++z)
      for (std::int64_t y = a[1]; y <= b[1]; ++y) {
        const std::size_t row = static_cast<std::size_t>((z * dims_[1] + y) * dims_[0]);
        for (std::int64_t x = a[0]; x <= b[0]; ++x) {
          const std::uint32_t s = start_[row + x], e = start_[row + x + 1];
          if (s == e) continue;
          const Vec3 center = lo_ + cell_ * Vec3(static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5,
                                                  static_cast<double>(z) + 0.5);
          if (!keep(center, half_diag)) continue;
          for (std::uint32_t i = s; i < e; ++i) fn(points_[i], labels_[i]);
        }
      }
  }

 private:
  static constexpr std::uint32_t kOutside = 0xFFFFFFFFu;
  Vec3 lo_ = Vec3::Zero();
  double cell_ = 1.0;
  std::int64_t dims_[3] = {0, 0, 0};
  std::vector<std::uint32_t> start_;
  std::vector<Vec3> points_;
  std::vector<std::int32_t> labels_;
};

// Maximal runs of consecutive candidates sharing the anchor and (up to
// rounding) the approach axis; the pose grid emits A*D such candidates per
// (point, view). The bounding cylinder absorbs the residual axis tilt.
constexpr double kRunAxisTolerance = 1e-6;

std::vector<std::pair<std::size_t, std::size_t>> runs_of(std::span<const PoseCandidate> cands,
                                                         const std::vector<Frame>& frames) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= cands.size(); ++i) {
    if (i == cands.size() || cands[i].anchor != cands[begin].anchor ||
        (frames[i].ex - frames[begin].ex).norm() > kRunAxisTolerance) {
      runs.emplace_back(begin, i);
      begin = i;
    }
  }
  return runs;
}

// Bounding cylinder of all gripper volumes in a run: axis through the anchor
// along the shared approach direction.
struct Cylinder {
  Vec3 origin, axis;
  double s_lo, s_hi, radius;

  Aabb bounds() const {
    Aabb b;
    for (int k = 0; k < 3; ++k) {
      const double spread = radius * std::sqrt(std::max(0.0, 1.0 - axis[k] * axis[k])) + kCullPad;
      const double a = origin[k] + s_lo * axis[k], c = origin[k] + s_hi * axis[k];
      b.lo[k] = std::min(a, c) - spread;
      b.hi[k] = std::max(a, c) + spread;
    }
    return b;
  }
  /// Conservative: false only if no point within `slack` of p is inside.
  bool near(const Vec3& p, double slack) const {
    const Vec3 d = p - origin;
    const double s = std::clamp(d.dot(axis), s_lo, s_hi);
    const double r = radius + slack + kCullPad;
    return (d - s * axis).squaredNorm() <= r * r;
  }
  bool contains(const Vec3& p) const {
    const Vec3 d = p - origin;
    const double s = d.dot(axis);
    if (s < s_lo - kCullPad || s > s_hi + kCullPad) return false;
    const double r = radius + kCullPad;
    return d.squaredNorm() - s * s <= r * r;
  }
};

}  // namespace

double approach_clearance_length(const GripperModel& gripper) { return gripper.finger_length; }

GripperVolume GripperVolume::make(const GripperModel& g, double width) {
  const double half = 0.5 * width;
  const double ft = g.finger_thickness;
  const double fh = 0.5 * g.finger_height;
  const double fl = g.finger_length;
  const double pd = g.palm_depth;
  const double cl = approach_clearance_length(g);
  GripperVolume v;
  v.boxes[kLeftFinger] = {{-fl, half, -fh}, {0.0, half + ft, fh}};
  v.boxes[kRightFinger] = {{-fl, -half - ft, -fh}, {0.0, -half, fh}};
  v.boxes[kPalm] = {{-fl - pd, -half - ft, -fh}, {-fl, half + ft, fh}};
  v.boxes[kApproachClearance] = {{-fl - pd - cl, -fh, -fh}, {-fl - pd, fh, fh}};
  v.closing_region = {{-fl, -half, -fh}, {0.0, half, fh}};
  return v;
}

GripperVolume GripperVolume::shrunk(double margin) const {
  GripperVolume v = *this;
  const Vec3 m = Vec3::Constant(margin);
  for (auto& b : v.boxes) {
    b.lo += m;
    b.hi -= m;
  }
  v.closing_region.lo += m;
  v.closing_region.hi -= m;
  return v;
}

CollisionScene CollisionScene::from_sample(const SceneSample& sample) {
  CollisionScene s;
  s.points = sample.world_cloud();
  s.labels = sample.labels;
  s.ground_height = sample.ground_height;
  s.camera_position = sample.camera.position;
  return s;
}

std::vector<PoseCandidate> project_poses(std::span<const PoseCandidate> candidates, const Rigid& part_pose) {
  const Quat rot(part_pose.linear());
  std::vector<PoseCandidate> out(candidates.begin(), candidates.end());
  for (auto& c : out) {
    c.rotation = (rot * c.rotation).normalized();
    c.translation = part_pose * c.translation;
    c.anchor = part_pose * c.anchor;
  }
  return out;
}

std::vector<std::uint8_t> filter_unreasonable_naive(std::span<const PoseCandidate> candidates,
                                                    const CollisionScene& scene, double tau) {
  std::vector<std::uint8_t> out(candidates.size(), 0);
  const double tau2 = tau * tau;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!(c.approach().dot(c.anchor - scene.camera_position) > 0.0)) continue;
    if (scene.points.empty()) {
      out[i] = 1;
      continue;
    }
    for (const auto& p : scene.points) {
      if ((p - c.anchor).squaredNorm() <= tau2) {
        out[i] = 1;
        break;
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> filter_unreasonable(std::span<const PoseCandidate> candidates,
                                              const CollisionScene& scene, double tau, unsigned threads) {
  if (tau < 0.0) throw ValidationError("tau must be non-negative");
  std::vector<std::uint8_t> out(candidates.size(), 0);
  if (candidates.empty()) return out;

  // Distinct anchors in run order.
  std::vector<std::size_t> run_start{0};
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].anchor != candidates[i - 1].anchor) run_start.push_back(i);
  run_start.push_back(candidates.size());
  const std::size_t nruns = run_start.size() - 1;

  Aabb roi;
  for (std::size_t r = 0; r < nruns; ++r) roi.extend(candidates[run_start[r]].anchor);
  const double cell = std::max(tau, 1e-3);
  roi.lo.array() -= cell;
  roi.hi.array() += cell;

  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>((k.x * 73856093) ^ (k.y * 19349663) ^ (k.z * 83492791));
    }
  };
  auto key_of = [&](const Vec3& p) {
    return Key{static_cast<std::int64_t>(std::floor(p.x() / cell)), static_cast<std::int64_t>(std::floor(p.y() / cell)),
               static_cast<std::int64_t>(std::floor(p.z() / cell))};
  };
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> grid;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const Vec3& p = scene.points[i];
    if ((p.array() < roi.lo.array()).any() || (p.array() > roi.hi.array()).any()) continue;
    grid[key_of(p)].push_back(static_cast<std::uint32_t>(i));
  }

  const double tau2 = tau * tau;
  std::vector<std::uint8_t> near(nruns, 0);
  parallel_for(nruns, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const Vec3& a = candidates[run_start[r]].anchor;
      const Key k = key_of(a);
      bool found = false;
      for (std::int64_t dx = -1; dx <= 1 && !found; ++dx)
        for (std::int64_t dy = -1; dy <= 1 && !found; ++dy)
          for (std::int64_t dz = -1; dz <= 1 && !found; ++dz) {
            auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
            if (it == grid.end()) continue;
            for (auto idx : it->second)
              if ((scene.points[idx] - a).squaredNorm() <= tau2) {
                found = true;
                break;
              }
          }
      near[r] = found || scene.points.empty() ? 1 : 0;
    }
  });

  parallel_for(nruns, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      if (!near[r]) continue;
      for (std::size_t i = run_start[r]; i < run_start[r + 1]; ++i) {
        const auto& c = candidates[i];
        out[i] = c.approach().dot(c.anchor - scene.camera_position) > 0.0 ? 1 : 0;
      }
    }
  });
  return out;
}

bool pose_collides(const PoseCandidate& candidate, const GripperVolume& volume, const CollisionScene& scene,
                   std::int32_t target_label) {
  const Frame f = Frame::of(candidate);
  if (scene.ground_height && below_ground(f, volume, *scene.ground_height)) return true;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    if (local_hits(local_point(f, scene.points[i]), volume, scene.labels[i] == target_label)) return true;
  }
  return false;
}

std::vector<std::uint8_t> filter_collisions_naive(std::span<const PoseCandidate> candidates,
                                                  const CollisionScene& scene, const GripperModel& gripper,
                                                  std::int32_t target_label, double shrink) {
  std::vector<std::uint8_t> out(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto vol = GripperVolume::make(gripper, candidates[i].width).shrunk(shrink);
    out[i] = pose_collides(candidates[i], vol, scene, target_label) ? 0 : 1;
  }
  return out;
}

std::vector<std::uint8_t> filter_collisions(std::span<const PoseCandidate> candidates, const CollisionScene& scene,
                                            const GripperModel& gripper, std::int32_t target_label,
                                            const CollisionOptions& options) {
  if (scene.labels.size() != scene.points.size()) throw ValidationError("scene labels and points differ in count");
  const std::size_t n = candidates.size();
  std::vector<std::uint8_t> out(n, 1);
  if (n == 0) return out;
  const unsigned threads = resolve_threads(options.threads);

  std::vector<Frame> frames(n);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) frames[i] = Frame::of(candidates[i]);
  });
  const auto runs = runs_of(candidates, frames);

  std::vector<Cylinder> cylinders(runs.size());
  parallel_for(runs.size(), threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const auto [b, e] = runs[r];
      Cylinder cyl{candidates[b].anchor, frames[b].ex, std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity(), 0.0};
      for (std::size_t i = b; i < e; ++i) {
        const auto ext = extent_of(GripperVolume::make(gripper, candidates[i].width).shrunk(options.shrink));
        const Vec3 d = candidates[i].translation - cyl.origin;
        const double s = d.dot(cyl.axis);
        const double off = (d - s * cyl.axis).norm();
        // A point at local x along a tilted axis strays |x| * tilt from the cylinder axis.
        const double stray = (frames[i].ex - cyl.axis).norm() * std::max(std::abs(ext.x_lo), std::abs(ext.x_hi));
        cyl.s_lo = std::min(cyl.s_lo, s + ext.x_lo - stray);
        cyl.s_hi = std::max(cyl.s_hi, s + ext.x_hi + stray);
        cyl.radius = std::max(cyl.radius, ext.radius + off + stray);
      }
      cylinders[r] = cyl;
    }
  });

  Aabb roi;
  for (const auto& c : cylinders) roi.extend(c.bounds());
  const double max_dim = std::max({gripper.max_width + 2.0 * gripper.finger_thickness,
                                   gripper.finger_length + gripper.palm_depth + approach_clearance_length(gripper),
                                   gripper.finger_height});
  const double cell = options.cell_size > 0.0 ? options.cell_size : 0.125 * max_dim;
  const PointGrid grid(scene, roi, cell);

  parallel_for(runs.size(), threads, [&](std::size_t r0, std::size_t r1) {
    std::vector<Vec3> near_pts;
    std::vector<std::uint8_t> near_exempt;
    // Coordinates of the gathered points in the first frame of the run
    // (origin at the anchor). Candidates of a run differ only by a turn
    // about the shared approach axis and a shift along it, so these give a
    // cheap approximation of each candidate's local x and z. It only culls,
    // with a margin well above its error, before the exact test.
    std::vector<double> ps, pu, pv;
    constexpr double kApproxPad = 1e-9;
    for (std::size_t r = r0; r < r1; ++r) {
      const auto [b, e] = runs[r];
      const Cylinder& cyl = cylinders[r];
      near_pts.clear();
      near_exempt.clear();
      ps.clear();
      pu.clear();
      pv.clear();
      const Frame& base = frames[b];
      const Aabb box = cyl.bounds();
      grid.visit(
          box.lo, box.hi, [&](const Vec3& c, double slack) { return cyl.near(c, slack); },
          [&](const Vec3& p, std::int32_t label) {
        if (!cyl.contains(p)) return;
        near_pts.push_back(p);
        near_exempt.push_back(label == target_label ? 1 : 0);
        const Vec3 d = p - cyl.origin;
        ps.push_back(d.dot(base.ex));
        pu.push_back(d.dot(base.ey));
        pv.push_back(d.dot(base.ez));
      });
      const std::size_t m = near_pts.size();
      for (std::size_t i = b; i < e; ++i) {
        const Frame& f = frames[i];
        const auto vol = GripperVolume::make(gripper, candidates[i].width).shrunk(options.shrink);
        if (scene.ground_height && below_ground(f, vol, *scene.ground_height)) {
          out[i] = 0;
          continue;
        }
        const auto ext = extent_of(vol);
        const Vec3 shift = cyl.origin - f.t;
        const double x_off = shift.dot(f.ex), z_off = shift.dot(f.ez);
        const double a0 = base.ex.dot(f.ez), a1 = base.ey.dot(f.ez), a2 = base.ez.dot(f.ez);
        const double b0 = base.ex.dot(f.ex), b1 = base.ey.dot(f.ex), b2 = base.ez.dot(f.ex);
        const double x_lo = ext.x_lo - x_off - kApproxPad, x_hi = ext.x_hi - x_off + kApproxPad;
        const double z_lo = ext.z_lo - z_off - kApproxPad, z_hi = ext.z_hi - z_off + kApproxPad;
        bool hit = false;
        for (std::size_t k = 0; k < m && !hit; ++k) {
          const double z = a0 * ps[k] + a1 * pu[k] + a2 * pv[k];
          if (z < z_lo || z > z_hi) continue;
          const double x = b0 * ps[k] + b1 * pu[k] + b2 * pv[k];
          if (x < x_lo || x > x_hi) continue;
          const Vec3 q = local_point(f, near_pts[k]);
          if (q.z() < ext.z_lo || q.z() > ext.z_hi || q.x() < ext.x_lo || q.x() > ext.x_hi) continue;
          hit = local_hits(q, vol, near_exempt[k] != 0);
        }
        if (hit) out[i] = 0;
      }
    }
  });
  return out;
}

FilterReport filter_batch(std::span<PoseCandidate> candidates, const CollisionScene& scene,
                          const GripperModel& gripper, std::int32_t target_label, double tau, unsigned threads) {
  FilterReport report;
  report.threads = resolve_threads(threads);
  report.input = candidates.size();

  auto t0 = std::chrono::steady_clock::now();
  const auto reasonable = filter_unreasonable(candidates, scene, tau, threads);
  report.reasonable_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  CollisionOptions opts;
  opts.threads = threads;
  const auto free = filter_collisions(candidates, scene, gripper, target_label, opts);
  report.collision_ms = ms_since(t0);

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].reasonable = reasonable[i] != 0;
    candidates[i].collision_free = free[i] != 0;
    if (!reasonable[i]) ++report.unreasonable;
    else if (!free[i]) ++report.unreachable;
    else ++report.survivors;
  }
  return report;
}

}  // namespace partpose
