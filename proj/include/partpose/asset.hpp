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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "partpose/common.hpp"
#include "partpose/mesh.hpp"

namespace partpose {

inline constexpr double kWeldTolerance = 1e-6;

enum class JointKind { kRevolute, kPrismatic, kFixed };

std::string_view to_string(JointKind kind);
JointKind joint_kind_from_string(std::string_view s);

/// The nine GAPart classes.
enum class PartClass {
  kLineFixedHandle,
  kRoundFixedHandle,
  kHingeHandle,
  kSliderButton,
  kHingeKnob,
  kSliderDrawer,
  kSliderLid,
  kHingeLid,
  kHingeDoor,
};

std::string_view to_string(PartClass c);
PartClass part_class_from_string(std::string_view s);

struct Link {
  std::string name;
  std::vector<std::string> mesh_files;  // relative to the asset file
  std::vector<TriMesh> meshes;          // link frame

  bool operator==(const Link&) const = default;
};

/// Child link pose = parent pose * origin * motion(value).
struct Joint {
  std::string name;
  std::string parent;
  std::string child;
  JointKind kind = JointKind::kFixed;
  Vec3 axis = Vec3::UnitZ();
  Rigid origin = Rigid::Identity();
  // Radians for revolute, meters for prismatic. Both zero for fixed joints.
  double lower = 0.0;
  double upper = 0.0;

  bool operator==(const Joint& o) const {
    return name == o.name && parent == o.parent && child == o.child && kind == o.kind && axis == o.axis &&
           origin.matrix() == o.origin.matrix() && lower == o.lower && upper == o.upper;
  }
};

struct GAPart {
  std::string part_id;
  PartClass semantic_class = PartClass::kLineFixedHandle;
  std::string owning_link;
  std::vector<std::string> mesh_files;
  std::vector<TriMesh> source_meshes;  // owning-link frame
  std::optional<TriMesh> fused_mesh;   // set by fuse_part_meshes
  bool actionable = true;

  bool operator==(const GAPart&) const = default;
};

struct JointConfig {
  std::vector<double> values;  // file order of joints
  bool operator==(const JointConfig&) const = default;
};

class ArticulatedAsset {
 public:
  std::string id;
  std::vector<Link> links;
  std::vector<Joint> joints;
  std::vector<GAPart> parts;
  Rigid base_frame = Rigid::Identity();

  /// Checks tree structure, limits, axes, indices and mesh references, then
  /// caches the traversal order. Throws ValidationError.
  void validate();

  std::size_t link_index(std::string_view name) const;
  std::size_t part_index(std::string_view part_id) const;
  std::size_t root_link() const { return root_; }
  /// Joints ordered parent-before-child.
  const std::vector<std::size_t>& joint_order() const { return order_; }

  JointConfig zero_config() const;
  bool fused() const;

  bool operator==(const ArticulatedAsset& o) const {
    return id == o.id && links == o.links && joints == o.joints && parts == o.parts &&
           base_frame.matrix() == o.base_frame.matrix();
  }

 private:
  std::size_t root_ = 0;
  std::vector<std::size_t> order_;
};

/// World-frame transforms per link and per part (a part moves with its link).
struct KinematicState {
  std::vector<Rigid> links;
  std::vector<Rigid> parts;
};

/// Loads the JSON asset description and every referenced mesh; fusion is not applied.
ArticulatedAsset load_asset(const std::filesystem::path& path);

/// Writes `asset.json` plus meshes (using the recorded file names) under `dir`.
void save_asset(const ArticulatedAsset& asset, const std::filesystem::path& dir);

/// Merges each part's source meshes into one welded mesh.
ArticulatedAsset fuse_part_meshes(ArticulatedAsset asset, double weld_tolerance = kWeldTolerance);

KinematicState forward_kinematics(const ArticulatedAsset& asset, const JointConfig& config);

/// Axis-angle or translation motion of a single joint at `value`.
Rigid joint_motion(const Joint& joint, double value);

/// Posed asset geometry in world frame: all link meshes plus fused part meshes.
Aabb world_bounds(const ArticulatedAsset& asset, const KinematicState& state);

}  // namespace partpose
