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

#include "partpose/scene.hpp"
#include "partpose/seed.hpp"
#include "test_util.hpp"

using namespace partpose;
using partpose::testing::TempDir;

namespace {

CameraIntrinsics tiny() {
  CameraIntrinsics k;
  k.width = 5;
  k.height = 5;
  k.fx = k.fy = 5.0;
  k.cx = k.cy = 2.0;
  return k;
}

// Latitude/longitude of `position` around `center`, measured in `frame`.
std::pair<double, double> lat_lon(const Vec3& position, const Vec3& center, const Mat3& frame = Mat3::Identity()) {
  const Vec3 d = frame.transpose() * (position - center);
  return {rad2deg(std::asin(d.z() / d.norm())), rad2deg(std::atan2(d.y(), d.x()))};
}

}  // namespace

TEST_CASE("joint randomization") {
  const ArticulatedAsset cab = make_demo_cabinet();
  CHECK(randomize_joints(cab, 1) == randomize_joints(cab, 1));
  CHECK_FALSE(randomize_joints(cab, 1) == randomize_joints(cab, 2));

  ArticulatedAsset a;
  a.links = {{"base", {}, {}}, {"c", {}, {}}};
  Joint j;
  j.name = "j";
  j.parent = "base";
  j.child = "c";
  j.kind = JointKind::kPrismatic;
  j.lower = j.upper = 0.5;
  a.joints = {j};
  a.validate();
  CHECK(randomize_joints(a, 9).values == std::vector<double>{0.5});

  a.joints[0].lower = 0.0;
  a.joints[0].upper = 1.0;
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const double v = randomize_joints(a, derive_seed(4, Stage::kJointConfig, s)).values[0];
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    sum += v;
  }
  CHECK(sum / 10000 >= 0.48);
  CHECK(sum / 10000 <= 0.52);
}

TEST_CASE("object-centric cameras stay in range") {
  const Aabb bounds{Vec3(-0.4, -0.3, 0), Vec3(0, 0.3, 0.8)};
  const CameraIntrinsics k;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto cam = sample_camera_object_centric(bounds, derive_seed(7, Stage::kObjectCamera, s), k);
    const auto [lat, lon] = lat_lon(cam.position, bounds.center());
    CHECK(lat >= 10.0 - 1e-9);
    CHECK(lat <= 60.0 + 1e-9);
    CHECK(lon >= -60.0 - 1e-9);
    CHECK(lon <= 60.0 + 1e-9);
    CHECK((cam.target - bounds.center()).norm() < 1e-12);
    const Mat3 r = cam.camera_to_world().linear();
    CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-9);
    // Whole bounding sphere inside the narrowest field of view.
    const double rho = 0.5 * bounds.extent().norm();
    CHECK(std::asin(rho / (cam.position - bounds.center()).norm()) <= k.min_half_fov() + 1e-12);
  }
  const auto a = sample_camera_object_centric(bounds, 42), b = sample_camera_object_centric(bounds, 42);
  CHECK(a.position == b.position);
}

TEST_CASE("part-centric cameras stay in range and frame the part") {
  const Aabb bounds{Vec3(-0.01, -0.05, -0.01), Vec3(0.01, 0.05, 0.01)};
  const Rigid pose = Rigid(Eigen::Translation3d(0.2, 0.1, 0.5) * Eigen::AngleAxisd(0.7, Vec3::UnitZ()));
  const CameraIntrinsics k;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto cam = sample_camera_part_centric(pose, bounds, derive_seed(8, Stage::kPartCamera, s), k);
    const Vec3 center = pose * bounds.center();
    const auto [lat, lon] = lat_lon(cam.position, center, pose.linear());
    CHECK(lat >= -1e-9);
    CHECK(lat <= 60.0 + 1e-9);
    CHECK(lon >= -75.0 - 1e-9);
    CHECK(lon <= 75.0 + 1e-9);
    // Aims at the part center.
    const Rigid c2w = cam.camera_to_world();
    CHECK((c2w.linear().col(2) - (center - cam.position).normalized()).norm() < 1e-12);
    // Bounding-sphere disc covers at least 40% of the image diagonal.
    const double rho = 0.5 * bounds.extent().norm();
    const double d = (cam.position - center).norm();
    const double disc = 2.0 * k.fx * rho / std::sqrt(d * d - rho * rho);
    CHECK(disc >= kPartCoverage * k.diagonal_pixels() - 1e-9);
  }
  const auto front = camera_on_sphere(Vec3::Zero(), Mat3::Identity(), 0.0, 0.0, 2.0);
  CHECK((front.position - Vec3(2, 0, 0)).norm() < 1e-15);
  const auto a = sample_camera_part_centric(pose, bounds, 5), b = sample_camera_part_centric(pose, bounds, 5);
  CHECK(a.position == b.position);
}

TEST_CASE("ground-only render from 1 m above") {
  ArticulatedAsset empty;
  empty.links = {{"base", {}, {}}};
  empty.validate();
  CameraPose cam;
  cam.position = Vec3(0, 0, 1);
  cam.target = Vec3::Zero();
  const auto s = raycast_depth(empty, empty.zero_config(), cam, tiny(), 0.0, 1);
  CHECK(s.depth[12] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.cloud.size() == 25);
  for (auto l : s.labels) CHECK(l == kBackgroundLabel);
}

TEST_CASE("unit cube two meters ahead") {
  const auto a = partpose::testing::single_part_asset(make_box({1.5, -0.5, -0.5}, {2.5, 0.5, 0.5}), "cube");
  CameraPose cam;
  cam.target = Vec3(1, 0, 0);
  const auto s = raycast_depth(a, a.zero_config(), cam, tiny(), -100.0, 1);
  CHECK(s.depth[12] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(s.labels[s.cloud.size() / 2] == 0);
}

TEST_CASE("render invariants on the demo cabinet") {
  const auto cab = fuse_part_meshes(make_demo_cabinet());
  CameraIntrinsics k;
  k.width = 160;
  k.height = 120;
  k.fx = k.fy = 115.0;
  k.cx = 79.5;
  k.cy = 59.5;
  const auto cfg = randomize_joints(cab, 3);
  const auto cam = sample_camera_object_centric(Aabb{Vec3(-0.4, -0.3, 0), Vec3(0, 0.3, 0.8)}, 11, k);
  const auto s = raycast_depth(cab, cfg, cam, k, 0.0, 2);
  REQUIRE(s.depth.size() == 160u * 120u);
  CHECK(s.cloud.size() == s.labels.size());
  CHECK(s.cloud.size() == s.pixels.size());
  std::size_t hits = 0;
  for (double d : s.depth) hits += d > 0;
  CHECK(hits == s.cloud.size());
  std::vector<std::uint32_t> px;
  const auto back = back_project(s.depth, k, &px);
  CHECK(px == s.pixels);
  for (std::size_t i = 0; i < back.size(); ++i) CHECK((back[i] - s.cloud[i]).norm() < 1e-6);
  bool any_part = false;
  for (auto l : s.labels) {
    CHECK(l >= kBackgroundLabel);
    CHECK(l < static_cast<std::int32_t>(cab.parts.size()));
    any_part = any_part || l >= 0;
  }
  CHECK(any_part);

  // Threads do not change the image.
  const auto s1 = raycast_depth(cab, cfg, cam, k, 0.0, 1);
  CHECK(s1.depth == s.depth);
  CHECK(s1.labels == s.labels);
}

TEST_CASE("depth along a row crossing a planar face is monotone") {
  const auto a = partpose::testing::single_part_asset(make_box({1.5, -0.5, -0.5}, {2.5, 0.5, 0.5}), "cube");
  CameraIntrinsics k;
  k.width = 64;
  k.height = 9;
  k.fx = k.fy = 40.0;
  k.cx = 31.5;
  k.cy = 4.0;
  CameraPose cam;
  cam.position = Vec3(0, -0.6, 0);
  cam.target = Vec3(2.0, 0.3, 0.0);
  const auto s = raycast_depth(a, a.zero_config(), cam, k, -100.0, 1);
  const int row = 4;
  const auto world = s.world_cloud();
  std::vector<double> on_face;
  for (std::size_t i = 0; i < s.pixels.size(); ++i) {
    if (s.pixels[i] / k.width != row) continue;
    if (std::abs(world[i].x() - 1.5) < 1e-9) on_face.push_back(s.cloud[i].z());
  }
  REQUIRE(on_face.size() > 5);
  // Camera yawed toward +Y: the front face recedes (or approaches) monotonically.
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < on_face.size(); ++i) {
    inc = inc && on_face[i] >= on_face[i - 1] - 1e-12;
    dec = dec && on_face[i] <= on_face[i - 1] + 1e-12;
  }
  CHECK((inc || dec));
}

TEST_CASE("depth png, camera json and cloud ply round trip") {
  TempDir dir;
  std::vector<double> depth{0.0, 1.0, 0.5, 2.345, 65.535, 0.001};
  write_depth_png(dir / "d.png", depth, 3, 2);
  int w = 0, h = 0;
  CHECK(read_depth_png(dir / "d.png", &w, &h) == depth);
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK_THROWS_AS(write_depth_png(dir / "x.png", depth, 4, 2), ValidationError);
  CHECK_THROWS_AS(read_depth_png(dir / "missing.png"), IoError);
  partpose::testing::write_text(dir / "bad.png", "not a png");
  CHECK_THROWS_AS(read_depth_png(dir / "bad.png"), ParseError);

  const CameraPose cam = camera_on_sphere(Vec3(0.1, 0.2, 0.3), Mat3::Identity(), 25.0, -40.0, 1.7);
  write_camera_json(dir / "c.json", tiny(), cam);
  CameraIntrinsics k;
  CameraPose back;
  read_camera_json(dir / "c.json", k, back);
  CHECK(k == tiny());
  CHECK(back.position == cam.position);
  CHECK(back.target == cam.target);
  CHECK(back.latitude_deg == cam.latitude_deg);

  const std::vector<Vec3> cloud{Vec3(0.5, -0.25, 1.0), Vec3(0.125, 0.0, 2.0)};
  const std::vector<std::int32_t> labels{3, kBackgroundLabel};
  write_cloud_ply(dir / "p.ply", cloud, labels);
  std::vector<Vec3> c2;
  std::vector<std::int32_t> l2;
  read_cloud_ply(dir / "p.ply", c2, l2);
  CHECK(c2 == cloud);
  CHECK(l2 == labels);
}
