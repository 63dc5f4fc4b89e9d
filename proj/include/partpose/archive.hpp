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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "partpose/antipodal.hpp"
#include "partpose/asset.hpp"
#include "partpose/common.hpp"
#include "partpose/sampling.hpp"
#include "partpose/scene.hpp"

namespace partpose {

inline constexpr std::uint32_t kArchiveVersion = 1;
inline constexpr std::size_t kPoseHeaderSize = 16;
inline constexpr std::size_t kPoseRecordSize = 50;
inline constexpr char kPoseMagic[8] = {'P', 'P', 'O', 'S', 'E', 'S', '\0', '\0'};

/// One row of a pose table. Little-endian on disk, 50 bytes:
///   u32 point_index, u32 view_index, u16 angle_index, u8 depth_index,
///   f32 quaternion (w, x, y, z), f32 translation (x, y, z), f32 width,
///   f32 q, u8 reasonable, u8 collision_free, u8 pad.
struct PoseRecord {
  std::uint32_t point_index = 0;
  std::uint32_t view_index = 0;
  std::uint16_t angle_index = 0;
  std::uint8_t depth_index = 0;
  std::array<float, 4> rotation{1.0f, 0.0f, 0.0f, 0.0f};
  std::array<float, 3> translation{0.0f, 0.0f, 0.0f};
  float width = 0.0f;
  float quality = 0.0f;
  std::uint8_t reasonable = 0;
  std::uint8_t collision_free = 0;

  static PoseRecord from(const PoseCandidate& c);
  /// Anchor is not stored and stays zero.
  PoseCandidate candidate() const;
  bool operator==(const PoseRecord&) const = default;
};

void encode_pose_record(const PoseRecord& r, std::uint8_t* out);
PoseRecord decode_pose_record(const std::uint8_t* in);

/// Per-stage filter counts for one part in one scene.
struct FilterCounts {
  std::string part_id;
  std::size_t input = 0, unreasonable = 0, unreachable = 0, survivors = 0;
  bool operator==(const FilterCounts&) const = default;
};

struct PartTable {
  std::string part_id;
  std::vector<PoseRecord> records;
  bool operator==(const PartTable&) const = default;
};

/// One rendered view. Depth is kept at millimeter resolution and the cloud at
/// single precision, exactly as stored.
struct SceneRecord {
  std::uint32_t config_index = 0;  // which joint configuration
  CameraKind kind = CameraKind::kObjectCentric;
  std::string target_part;  // part-centric views only
  JointConfig config;
  CameraPose camera;
  CameraIntrinsics intrinsics;
  double ground_height = 0.0;
  std::vector<double> depth;
  std::vector<Vec3> cloud;
  std::vector<std::int32_t> labels;
  std::uint32_t views = 0;
  std::vector<float> point_scores;
  std::vector<float> view_scores;  // points x views
  std::vector<FilterCounts> filters;

  /// Rounds depth to millimeters and the cloud to float; reports equal what
  /// read_archive returns.
  static SceneRecord from(const SceneSample& sample, CameraKind kind);
  bool operator==(const SceneRecord& o) const;
};

/// Everything needed to regenerate the archive.
struct RunSettings {
  std::string asset_path;
  std::vector<std::string> part_ids;  // empty = all parts
  std::uint64_t root_seed = 0;
  SamplingConfig sampling;
  GripperModel gripper;
  FrictionGrid friction;
  double threshold = 0.5;
  double tau = 0.005;
  std::uint32_t scene_configs = 0;  // joint configurations; 0 = part annotation only
  std::uint32_t object_views = 5;
  std::uint32_t part_views = 5;
  CameraIntrinsics intrinsics;
  double ground_height = 0.0;
  bool operator==(const RunSettings&) const = default;
};

struct Archive {
  std::string asset_id;
  std::string tool_version;
  RunSettings settings;
  std::vector<PartTable> parts;
  std::vector<SceneRecord> scenes;
  bool operator==(const Archive&) const = default;
};

/// Writes the archive under `dir` (created if missing), then re-reads every
/// file and checks its checksum. Throws IoError or ChecksumError.
void write_archive(const Archive& archive, const std::filesystem::path& dir);

/// Throws VersionError, TruncationError, ChecksumError or IoError.
Archive read_archive(const std::filesystem::path& dir);
RunSettings read_run_settings(const std::filesystem::path& manifest);

/// Raw table access; `expected_rows` is checked against the file size.
std::vector<PoseRecord> read_pose_table(const std::filesystem::path& file, std::size_t expected_rows);
std::vector<std::uint8_t> encode_pose_table(const std::vector<PoseRecord>& records);

}  // namespace partpose
