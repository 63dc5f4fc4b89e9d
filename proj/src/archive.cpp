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

#include "partpose/archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace partpose {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u16(std::uint8_t*& p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p += 2;
}
void put_u32(std::uint8_t*& p, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) p[k] = static_cast<std::uint8_t>(v >> (8 * k));
  p += 4;
}
void put_f32(std::uint8_t*& p, float v) { put_u32(p, std::bit_cast<std::uint32_t>(v)); }

std::uint16_t get_u16(const std::uint8_t*& p) {
  const auto v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  p += 2;
  return v;
}
std::uint32_t get_u32(const std::uint8_t*& p) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  p += 4;
  return v;
}
float get_f32(const std::uint8_t*& p) { return std::bit_cast<float>(get_u32(p)); }

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::uint32_t crc_of(const std::vector<std::uint8_t>& data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < data.size()) {
    const auto len = static_cast<uInt>(std::min<std::size_t>(data.size() - off, 1u << 30));
    crc = crc32(crc, data.data() + off, len);
    off += len;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc_of_file(const fs::path& path) { return crc_of(read_bytes(path)); }

std::uint32_t combined_checksum(const std::map<std::string, std::uint32_t>& files) {
  std::vector<std::uint8_t> buf;
  for (const auto& [name, crc] : files) {
    buf.insert(buf.end(), name.begin(), name.end());
    buf.push_back(0);
    std::uint8_t b[4];
    std::uint8_t* p = b;
    put_u32(p, crc);
    buf.insert(buf.end(), b, b + 4);
  }
  return crc_of(buf);
}

std::string kind_name(CameraKind k) { return k == CameraKind::kObjectCentric ? "object" : "part"; }
CameraKind kind_from(const std::string& s) {
  if (s == "object") return CameraKind::kObjectCentric;
  if (s == "part") return CameraKind::kPartCentric;
  throw ParseError("unknown camera kind: " + s);
}

json settings_json(const RunSettings& s) {
  return {{"asset", s.asset_path},
          {"parts", s.part_ids},
          {"seed", s.root_seed},
          {"sampling",
           {{"n", s.sampling.n},
            {"views", s.sampling.views},
            {"angles", s.sampling.angles},
            {"depths", s.sampling.depths},
            {"depth_values", s.sampling.depth_values}}},
          {"gripper",
           {{"max_width", s.gripper.max_width},
            {"finger_length", s.gripper.finger_length},
            {"finger_thickness", s.gripper.finger_thickness},
            {"finger_height", s.gripper.finger_height},
            {"palm_depth", s.gripper.palm_depth}}},
          {"mu_grid", s.friction.mu_values},
          {"threshold", s.threshold},
          {"tau", s.tau},
          {"scene_configs", s.scene_configs},
          {"object_views", s.object_views},
          {"part_views", s.part_views},
          {"intrinsics",
           {{"width", s.intrinsics.width},
            {"height", s.intrinsics.height},
            {"fx", s.intrinsics.fx},
            {"fy", s.intrinsics.fy},
            {"cx", s.intrinsics.cx},
            {"cy", s.intrinsics.cy}}},
          {"ground_height", s.ground_height}};
}

RunSettings settings_from(const json& j) {
  RunSettings s;
  s.asset_path = j.at("asset").get<std::string>();
  s.part_ids = j.at("parts").get<std::vector<std::string>>();
  s.root_seed = j.at("seed").get<std::uint64_t>();
  const auto& js = j.at("sampling");
  s.sampling.n = js.at("n").get<std::uint32_t>();
  s.sampling.views = js.at("views").get<std::uint32_t>();
  s.sampling.angles = js.at("angles").get<std::uint32_t>();
  s.sampling.depths = js.at("depths").get<std::uint32_t>();
  s.sampling.depth_values = js.at("depth_values").get<std::vector<double>>();
  s.sampling.seed = s.root_seed;
  const auto& jg = j.at("gripper");
  s.gripper.max_width = jg.at("max_width").get<double>();
  s.gripper.finger_length = jg.at("finger_length").get<double>();
  s.gripper.finger_thickness = jg.at("finger_thickness").get<double>();
  s.gripper.finger_height = jg.at("finger_height").get<double>();
  s.gripper.palm_depth = jg.at("palm_depth").get<double>();
  s.friction.mu_values = j.at("mu_grid").get<std::vector<double>>();
  s.threshold = j.at("threshold").get<double>();
  s.tau = j.at("tau").get<double>();
  s.scene_configs = j.at("scene_configs").get<std::uint32_t>();
  s.object_views = j.at("object_views").get<std::uint32_t>();
  s.part_views = j.at("part_views").get<std::uint32_t>();
  const auto& ji = j.at("intrinsics");
  s.intrinsics.width = ji.at("width").get<int>();
  s.intrinsics.height = ji.at("height").get<int>();
  s.intrinsics.fx = ji.at("fx").get<double>();
  s.intrinsics.fy = ji.at("fy").get<double>();
  s.intrinsics.cx = ji.at("cx").get<double>();
  s.intrinsics.cy = ji.at("cy").get<double>();
  s.ground_height = j.at("ground_height").get<double>();
  return s;
}

std::vector<std::uint8_t> encode_actioness(const SceneRecord& s) {
  std::vector<std::uint8_t> buf(8 + 4 * (s.point_scores.size() + s.view_scores.size()));
  std::uint8_t* p = buf.data();
  put_u32(p, static_cast<std::uint32_t>(s.point_scores.size()));
  put_u32(p, s.views);
  for (float v : s.point_scores) put_f32(p, v);
  for (float v : s.view_scores) put_f32(p, v);
  return buf;
}

void decode_actioness(const fs::path& file, const std::vector<std::uint8_t>& buf, SceneRecord& s) {
  if (buf.size() < 8) throw TruncationError("truncated actioness file " + file.string());
  const std::uint8_t* p = buf.data();
  const std::uint64_t n = get_u32(p);
  const std::uint32_t v = get_u32(p);
  const std::uint64_t need = 8 + 4 * (n + n * v);
  if (buf.size() < need) throw TruncationError("truncated actioness file " + file.string());
  if (buf.size() != need) throw ArchiveError("trailing bytes in actioness file " + file.string());
  s.views = v;
  s.point_scores.resize(n);
  s.view_scores.resize(n * v);
  for (auto& x : s.point_scores) x = get_f32(p);
  for (auto& x : s.view_scores) x = get_f32(p);
}

void check_header(const fs::path& file, const std::vector<std::uint8_t>& buf) {
  if (buf.size() < kPoseHeaderSize) throw TruncationError("truncated pose table header in " + file.string());
  if (std::memcmp(buf.data(), kPoseMagic, sizeof kPoseMagic) != 0)
    throw ArchiveError("bad pose table magic in " + file.string());
  const std::uint8_t* p = buf.data() + 8;
  const auto version = get_u32(p);
  const auto record = get_u32(p);
  if (version != kArchiveVersion)
    throw VersionError("pose table " + file.string() + " has version " + std::to_string(version) + ", expected " +
                       std::to_string(kArchiveVersion));
  if (record != kPoseRecordSize) throw ArchiveError("unexpected record size in " + file.string());
}

std::vector<PoseRecord> decode_table(const fs::path& file, const std::vector<std::uint8_t>& buf,
                                     std::size_t expected_rows) {
  check_header(file, buf);
  const std::size_t need = kPoseHeaderSize + expected_rows * kPoseRecordSize;
  if (buf.size() < need)
    throw TruncationError("pose table " + file.string() + " is truncated: " +
                          std::to_string((buf.size() - kPoseHeaderSize) / kPoseRecordSize) + " of " +
                          std::to_string(expected_rows) + " records");
  if (buf.size() != need) throw ArchiveError("pose table " + file.string() + " has trailing bytes");
  std::vector<PoseRecord> out(expected_rows);
  for (std::size_t i = 0; i < expected_rows; ++i)
    out[i] = decode_pose_record(buf.data() + kPoseHeaderSize + i * kPoseRecordSize);
  return out;
}

Vec3 float_round(const Vec3& v) {
  return {static_cast<double>(static_cast<float>(v.x())), static_cast<double>(static_cast<float>(v.y())),
          static_cast<double>(static_cast<float>(v.z()))};
}

}  // namespace

PoseRecord PoseRecord::from(const PoseCandidate& c) {
  PoseRecord r;
  r.point_index = c.point_index;
  r.view_index = c.view_index;
  r.angle_index = c.angle_index;
  r.depth_index = c.depth_index;
  r.rotation = {static_cast<float>(c.rotation.w()), static_cast<float>(c.rotation.x()),
                static_cast<float>(c.rotation.y()), static_cast<float>(c.rotation.z())};
  r.translation = {static_cast<float>(c.translation.x()), static_cast<float>(c.translation.y()),
                   static_cast<float>(c.translation.z())};
  r.width = static_cast<float>(c.width);
  r.quality = static_cast<float>(c.quality);
  r.reasonable = c.reasonable ? 1 : 0;
  r.collision_free = c.collision_free ? 1 : 0;
  return r;
}

PoseCandidate PoseRecord::candidate() const {
  PoseCandidate c;
  c.point_index = point_index;
  c.view_index = view_index;
  c.angle_index = angle_index;
  c.depth_index = depth_index;
  c.rotation = Quat(rotation[0], rotation[1], rotation[2], rotation[3]).normalized();
  c.translation = Vec3(translation[0], translation[1], translation[2]);
  c.width = width;
  c.quality = quality;
  c.reasonable = reasonable != 0;
  c.collision_free = collision_free != 0;
  return c;
}

void encode_pose_record(const PoseRecord& r, std::uint8_t* p) {
  put_u32(p, r.point_index);
  put_u32(p, r.view_index);
  put_u16(p, r.angle_index);
  *p++ = r.depth_index;
  for (float v : r.rotation) put_f32(p, v);
  for (float v : r.translation) put_f32(p, v);
  put_f32(p, r.width);
  put_f32(p, r.quality);
  *p++ = r.reasonable;
  *p++ = r.collision_free;
  *p++ = 0;
}

PoseRecord decode_pose_record(const std::uint8_t* p) {
  PoseRecord r;
  r.point_index = get_u32(p);
  r.view_index = get_u32(p);
  r.angle_index = get_u16(p);
  r.depth_index = *p++;
  for (float& v : r.rotation) v = get_f32(p);
  for (float& v : r.translation) v = get_f32(p);
  r.width = get_f32(p);
  r.quality = get_f32(p);
  r.reasonable = *p++;
  r.collision_free = *p++;
  return r;
}

std::vector<std::uint8_t> encode_pose_table(const std::vector<PoseRecord>& records) {
  std::vector<std::uint8_t> buf(kPoseHeaderSize + records.size() * kPoseRecordSize, 0);
  std::memcpy(buf.data(), kPoseMagic, sizeof kPoseMagic);
  std::uint8_t* p = buf.data() + 8;
  put_u32(p, kArchiveVersion);
  put_u32(p, static_cast<std::uint32_t>(kPoseRecordSize));
  for (std::size_t i = 0; i < records.size(); ++i)
    encode_pose_record(records[i], buf.data() + kPoseHeaderSize + i * kPoseRecordSize);
  return buf;
}

std::vector<PoseRecord> read_pose_table(const fs::path& file, std::size_t expected_rows) {
  return decode_table(file, read_bytes(file), expected_rows);
}

SceneRecord SceneRecord::from(const SceneSample& sample, CameraKind kind) {
  SceneRecord r;
  r.kind = kind;
  r.config = sample.config;
  r.camera = sample.camera;
  r.intrinsics = sample.intrinsics;
  r.ground_height = sample.ground_height;
  r.depth.resize(sample.depth.size());
  for (std::size_t i = 0; i < r.depth.size(); ++i) {
    const double mm = std::round(sample.depth[i] * 1000.0);
    r.depth[i] = (sample.depth[i] > 0.0 && mm <= 65535.0) ? mm / 1000.0 : 0.0;
  }
  r.cloud.reserve(sample.cloud.size());
  for (const auto& p : sample.cloud) r.cloud.push_back(float_round(p));
  r.labels = sample.labels;
  return r;
}

bool SceneRecord::operator==(const SceneRecord& o) const {
  auto same_camera = [](const CameraPose& a, const CameraPose& b) {
    return a.position == b.position && a.target == b.target && a.up == b.up && a.latitude_deg == b.latitude_deg &&
           a.longitude_deg == b.longitude_deg && a.radius == b.radius;
  };
  return config_index == o.config_index && kind == o.kind && target_part == o.target_part && config == o.config &&
         same_camera(camera, o.camera) && intrinsics == o.intrinsics && ground_height == o.ground_height &&
         depth == o.depth && cloud == o.cloud && labels == o.labels && views == o.views &&
         point_scores == o.point_scores && view_scores == o.view_scores && filters == o.filters;
}

void write_archive(const Archive& archive, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "parts", ec);
  if (ec) throw IoError("cannot create " + (dir / "parts").string() + ": " + ec.message());

  std::map<std::string, std::uint32_t> checksums;
  json parts = json::array();
  for (const auto& t : archive.parts) {
    if (t.part_id.empty() || t.part_id.find('/') != std::string::npos || t.part_id.front() == '.')
      throw ValidationError("part id not usable as a file name: " + t.part_id);
    const std::string rel = "parts/" + t.part_id + ".poses";
    const auto buf = encode_pose_table(t.records);
    write_bytes(dir / rel, buf);
    checksums[rel] = crc_of(buf);
    parts.push_back({{"part_id", t.part_id}, {"file", rel}, {"rows", t.records.size()}});
  }

  json scenes = json::array();
  for (std::size_t k = 0; k < archive.scenes.size(); ++k) {
    const auto& s = archive.scenes[k];
    if (s.labels.size() != s.cloud.size() || s.point_scores.size() != s.cloud.size() ||
        s.view_scores.size() != s.cloud.size() * s.views)
      throw ValidationError("scene " + std::to_string(k) + " has inconsistent array sizes");
    const std::string rel = "scenes/" + std::to_string(k);
    fs::create_directories(dir / rel, ec);
    if (ec) throw IoError("cannot create " + (dir / rel).string() + ": " + ec.message());
    write_depth_png(dir / rel / "depth.png", s.depth, s.intrinsics.width, s.intrinsics.height);
    write_camera_json(dir / rel / "depth.json", s.intrinsics, s.camera);
    write_cloud_ply(dir / rel / "cloud.ply", s.cloud, s.labels);
    const auto act = encode_actioness(s);
    write_bytes(dir / rel / "actioness.bin", act);
    for (const char* f : {"depth.png", "depth.json", "cloud.ply", "actioness.bin"})
      checksums[rel + "/" + f] = crc_of_file(dir / rel / f);
    json filters = json::array();
    for (const auto& f : s.filters)
      filters.push_back({{"part_id", f.part_id},
                         {"input", f.input},
                         {"unreasonable", f.unreasonable},
                         {"unreachable", f.unreachable},
                         {"survivors", f.survivors}});
    scenes.push_back({{"dir", rel},
                      {"config_index", s.config_index},
                      {"kind", kind_name(s.kind)},
                      {"target_part", s.target_part},
                      {"joint_config", s.config.values},
                      {"ground_height", s.ground_height},
                      {"points", s.cloud.size()},
                      {"views", s.views},
                      {"filters", filters}});
  }

  json files = json::object();
  for (const auto& [name, crc] : checksums) files[name] = crc;
  const json manifest = {{"format", "partpose-archive"},
                         {"version", kArchiveVersion},
                         {"tool_version", archive.tool_version},
                         {"asset_id", archive.asset_id},
                         {"settings", settings_json(archive.settings)},
                         {"parts", parts},
                         {"scenes", scenes},
                         {"checksums", files},
                         {"combined_checksum", combined_checksum(checksums)}};
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + (dir / "manifest.json").string());
  }

  // Verification pass.
  for (const auto& [name, crc] : checksums)
    if (crc_of_file(dir / name) != crc) throw ChecksumError("checksum mismatch after writing " + name);
}

namespace {

json load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (m.value("format", "") != "partpose-archive") throw ArchiveError("not an archive manifest: " + path.string());
  const auto version = m.value("version", 0u);
  if (version != kArchiveVersion)
    throw VersionError("archive version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kArchiveVersion) + ")");
  return m;
}

}  // namespace

RunSettings read_run_settings(const fs::path& manifest) {
  const json m = load_manifest(manifest);
  try {
    return settings_from(m.at("settings"));
  } catch (const json::exception& e) {
    throw ParseError("malformed manifest settings: " + std::string(e.what()));
  }
}

Archive read_archive(const fs::path& dir) {
  const json m = load_manifest(dir / "manifest.json");
  Archive a;
  try {
    std::map<std::string, std::uint32_t> checksums;
    for (const auto& [name, crc] : m.at("checksums").items()) checksums[name] = crc.get<std::uint32_t>();
    if (combined_checksum(checksums) != m.at("combined_checksum").get<std::uint32_t>())
      throw ChecksumError("manifest checksum table does not match its combined checksum");
    auto load = [&](const std::string& rel) {
      const auto it = checksums.find(rel);
      if (it == checksums.end()) throw ArchiveError("no checksum recorded for " + rel);
      if (!fs::exists(dir / rel)) throw IoError("missing archive file " + (dir / rel).string());
      return read_bytes(dir / rel);
    };
    auto verify = [&](const std::string& rel, const std::vector<std::uint8_t>& buf) {
      if (crc_of(buf) != checksums.at(rel)) throw ChecksumError("checksum mismatch in " + (dir / rel).string());
    };

    a.asset_id = m.at("asset_id").get<std::string>();
    a.tool_version = m.at("tool_version").get<std::string>();
    a.settings = settings_from(m.at("settings"));
    for (const auto& jp : m.at("parts")) {
      PartTable t;
      t.part_id = jp.at("part_id").get<std::string>();
      const auto rel = jp.at("file").get<std::string>();
      const auto buf = load(rel);
      // Structural checks first so truncation is reported as such.
      t.records = decode_table(dir / rel, buf, jp.at("rows").get<std::size_t>());
      verify(rel, buf);
      a.parts.push_back(std::move(t));
    }
    for (const auto& js : m.at("scenes")) {
      SceneRecord s;
      const auto rel = js.at("dir").get<std::string>();
      s.config_index = js.at("config_index").get<std::uint32_t>();
      s.kind = kind_from(js.at("kind").get<std::string>());
      s.target_part = js.at("target_part").get<std::string>();
      s.config.values = js.at("joint_config").get<std::vector<double>>();
      s.ground_height = js.at("ground_height").get<double>();
      for (const auto& jf : js.at("filters"))
        s.filters.push_back({jf.at("part_id").get<std::string>(), jf.at("input").get<std::size_t>(),
                             jf.at("unreasonable").get<std::size_t>(), jf.at("unreachable").get<std::size_t>(),
                             jf.at("survivors").get<std::size_t>()});
      for (const char* f : {"depth.png", "depth.json", "cloud.ply"}) verify(rel + "/" + f, load(rel + "/" + f));
      read_camera_json(dir / rel / "depth.json", s.intrinsics, s.camera);
      int w = 0, h = 0;
      s.depth = read_depth_png(dir / rel / "depth.png", &w, &h);
      if (w != s.intrinsics.width || h != s.intrinsics.height)
        throw ArchiveError("depth image size does not match intrinsics in " + rel);
      read_cloud_ply(dir / rel / "cloud.ply", s.cloud, s.labels);
      const auto act = load(rel + "/actioness.bin");
      decode_actioness(dir / rel / "actioness.bin", act, s);
      verify(rel + "/actioness.bin", act);
      if (s.cloud.size() != js.at("points").get<std::size_t>() || s.views != js.at("views").get<std::uint32_t>() ||
          s.point_scores.size() != s.cloud.size())
        throw ArchiveError("scene " + rel + " counts do not match the manifest");
      a.scenes.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ParseError("malformed manifest: " + std::string(e.what()));
  }
  return a;
}

}  // namespace partpose
