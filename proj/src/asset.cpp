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

#include "partpose/asset.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace partpose {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<PartClass, std::string_view>, 9> kPartClassNames{{
    {PartClass::kLineFixedHandle, "line-fixed-handle"},
    {PartClass::kRoundFixedHandle, "round-fixed-handle"},
    {PartClass::kHingeHandle, "hinge-handle"},
    {PartClass::kSliderButton, "slider-button"},
    {PartClass::kHingeKnob, "hinge-knob"},
    {PartClass::kSliderDrawer, "slider-drawer"},
    {PartClass::kSliderLid, "slider-lid"},
    {PartClass::kHingeLid, "hinge-lid"},
    {PartClass::kHingeDoor, "hinge-door"},
}};

Rigid matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 16) throw ParseError(what + ": expected 16 numbers (4x4 row-major)");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = j.at(r * 4 + c).get<double>();
  const Mat3 rot = m.topLeftCorner<3, 3>();
  if (!(rot.transpose() * rot).isApprox(Mat3::Identity(), 1e-6) || rot.determinant() < 0.0)
    throw ValidationError(what + ": rotation block is not a proper rotation");
  if (m.row(3) != Eigen::RowVector4d(0, 0, 0, 1)) throw ValidationError(what + ": bottom row must be 0 0 0 1");
  Rigid t = Rigid::Identity();
  t.matrix() = m;
  return t;
}

json matrix_to_json(const Rigid& t) {
  json out = json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.push_back(t.matrix()(r, c));
  return out;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& s : j.at(key)) out.push_back(s.get<std::string>());
  return out;
}

}  // namespace

std::string_view to_string(JointKind kind) {
  switch (kind) {
    case JointKind::kRevolute: return "revolute";
    case JointKind::kPrismatic: return "prismatic";
    case JointKind::kFixed: return "fixed";
  }
  return "fixed";
}

JointKind joint_kind_from_string(std::string_view s) {
  if (s == "revolute") return JointKind::kRevolute;
  if (s == "prismatic") return JointKind::kPrismatic;
  if (s == "fixed") return JointKind::kFixed;
  throw ValidationError("unknown joint kind '" + std::string(s) + "'");
}

std::string_view to_string(PartClass c) {
  for (const auto& [k, name] : kPartClassNames)
    if (k == c) return name;
  return "line-fixed-handle";
}

PartClass part_class_from_string(std::string_view s) {
  for (const auto& [k, name] : kPartClassNames)
    if (name == s) return k;
  throw ValidationError("unknown semantic class '" + std::string(s) + "'");
}

std::size_t ArticulatedAsset::link_index(std::string_view name) const {
  for (std::size_t i = 0; i < links.size(); ++i)
    if (links[i].name == name) return i;
  throw ValidationError("unknown link '" + std::string(name) + "'");
}

std::size_t ArticulatedAsset::part_index(std::string_view part_id) const {
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i].part_id == part_id) return i;
  throw ValidationError("unknown part '" + std::string(part_id) + "'");
}

JointConfig ArticulatedAsset::zero_config() const {
  JointConfig cfg;
  for (const auto& j : joints) cfg.values.push_back(std::clamp(0.0, j.lower, j.upper));
  return cfg;
}

bool ArticulatedAsset::fused() const {
  for (const auto& p : parts)
    if (!p.fused_mesh) return false;
  return true;
}

void ArticulatedAsset::validate() {
  if (links.empty()) throw ValidationError("asset has no links");
  std::set<std::string> names;
  for (const auto& l : links)
    if (!names.insert(l.name).second) throw ValidationError("duplicate link name '" + l.name + "'");

  std::vector<int> parent_joint(links.size(), -1);
  std::set<std::string> joint_names;
  for (std::size_t j = 0; j < joints.size(); ++j) {
    auto& joint = joints[j];
    if (!joint_names.insert(joint.name).second) throw ValidationError("duplicate joint name '" + joint.name + "'");
    const auto child = link_index(joint.child);
    link_index(joint.parent);
    if (joint.parent == joint.child) throw ValidationError("joint '" + joint.name + "' connects a link to itself");
    if (parent_joint[child] >= 0) throw ValidationError("link '" + joint.child + "' has more than one parent joint");
    parent_joint[child] = static_cast<int>(j);
    if (joint.lower > joint.upper) throw ValidationError("joint '" + joint.name + "': lower limit exceeds upper limit");
    if (joint.kind == JointKind::kFixed && (joint.lower != 0.0 || joint.upper != 0.0))
      throw ValidationError("fixed joint '" + joint.name + "' must not declare limits");
    const double len = joint.axis.norm();
    if (joint.kind != JointKind::kFixed && len == 0.0) throw ValidationError("joint '" + joint.name + "' has a zero axis");
    if (len > 0.0 && std::abs(len - 1.0) > 1e-12) joint.axis /= len;
  }

  std::vector<std::size_t> roots;
  for (std::size_t l = 0; l < links.size(); ++l)
    if (parent_joint[l] < 0) roots.push_back(l);
  if (roots.size() != 1) throw ValidationError("link graph must have exactly one root, found " + std::to_string(roots.size()));
  root_ = roots.front();

  // Breadth-first from the root; a link unreachable from it sits on a cycle.
  order_.clear();
  std::vector<std::size_t> frontier{root_};
  std::vector<bool> seen(links.size(), false);
  seen[root_] = true;
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (auto l : frontier) {
      for (std::size_t j = 0; j < joints.size(); ++j) {
        if (joints[j].parent != links[l].name) continue;
        const auto c = link_index(joints[j].child);
        if (seen[c]) throw ValidationError("cycle in link graph at '" + links[c].name + "'");
        seen[c] = true;
        order_.push_back(j);
        next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  for (std::size_t l = 0; l < links.size(); ++l)
    if (!seen[l]) throw ValidationError("cycle in link graph at '" + links[l].name + "'");

  std::set<std::string> files;
  auto claim = [&](const std::string& f) {
    if (!files.insert(f).second) throw ValidationError("mesh file '" + f + "' referenced more than once");
  };
  for (const auto& l : links) {
    for (const auto& f : l.mesh_files) claim(f);
    for (const auto& m : l.meshes) m.validate();
  }
  std::set<std::string> part_ids;
  for (const auto& p : parts) {
    if (!part_ids.insert(p.part_id).second) throw ValidationError("duplicate part id '" + p.part_id + "'");
    link_index(p.owning_link);
    for (const auto& f : p.mesh_files) claim(f);
    for (const auto& m : p.source_meshes) m.validate();
    if (p.fused_mesh) p.fused_mesh->validate();
  }
}

ArticulatedAsset load_asset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open asset file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("malformed asset file " + path.string() + ": " + e.what());
  }
  const auto dir = path.parent_path();
  ArticulatedAsset asset;
  try {
    asset.id = doc.value("id", path.stem().string());
    if (doc.contains("base")) asset.base_frame = matrix_from_json(doc.at("base"), "base");
    for (const auto& jl : doc.at("links")) {
      Link link;
      link.name = jl.at("name").get<std::string>();
      link.mesh_files = string_list(jl, "meshes");
      for (const auto& f : link.mesh_files) link.meshes.push_back(read_mesh(dir / f));
      asset.links.push_back(std::move(link));
    }
    for (const auto& jj : doc.value("joints", json::array())) {
      Joint joint;
      joint.name = jj.at("name").get<std::string>();
      joint.parent = jj.at("parent").get<std::string>();
      joint.child = jj.at("child").get<std::string>();
      joint.kind = joint_kind_from_string(jj.at("kind").get<std::string>());
      if (jj.contains("axis")) {
        const auto& a = jj.at("axis");
        if (!a.is_array() || a.size() != 3) throw ParseError("joint '" + joint.name + "': axis needs 3 numbers");
        joint.axis = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
      }
      if (jj.contains("origin")) joint.origin = matrix_from_json(jj.at("origin"), "joint '" + joint.name + "' origin");
      if (jj.contains("limits")) {
        if (joint.kind == JointKind::kFixed) throw ValidationError("fixed joint '" + joint.name + "' must not declare limits");
        const auto& lim = jj.at("limits");
        if (!lim.is_array() || lim.size() != 2) throw ParseError("joint '" + joint.name + "': limits need [lower, upper]");
        joint.lower = lim[0].get<double>();
        joint.upper = lim[1].get<double>();
      } else if (joint.kind != JointKind::kFixed) {
        throw ValidationError("joint '" + joint.name + "' lacks limits");
      }
      asset.joints.push_back(std::move(joint));
    }
    for (const auto& jp : doc.value("parts", json::array())) {
      GAPart part;
      part.part_id = jp.at("part_id").get<std::string>();
      part.semantic_class = part_class_from_string(jp.at("semantic_class").get<std::string>());
      part.owning_link = jp.at("owning_link").get<std::string>();
      part.actionable = jp.value("actionable", true);
      part.mesh_files = string_list(jp, "meshes");
      for (const auto& f : part.mesh_files) part.source_meshes.push_back(read_mesh(dir / f));
      asset.parts.push_back(std::move(part));
    }
  } catch (const json::exception& e) {
    throw ParseError("malformed asset file " + path.string() + ": " + e.what());
  }
  asset.validate();
  return asset;
}

void save_asset(const ArticulatedAsset& asset, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  json doc;
  doc["id"] = asset.id;
  doc["base"] = matrix_to_json(asset.base_frame);
  doc["links"] = json::array();
  for (const auto& l : asset.links) {
    doc["links"].push_back({{"name", l.name}, {"meshes", l.mesh_files}});
    for (std::size_t m = 0; m < l.meshes.size(); ++m) {
      std::filesystem::create_directories((dir / l.mesh_files[m]).parent_path(), ec);
      write_mesh(dir / l.mesh_files[m], l.meshes[m]);
    }
  }
  doc["joints"] = json::array();
  for (const auto& j : asset.joints) {
    json jj = {{"name", j.name},
               {"parent", j.parent},
               {"child", j.child},
               {"kind", std::string(to_string(j.kind))},
               {"axis", {j.axis.x(), j.axis.y(), j.axis.z()}},
               {"origin", matrix_to_json(j.origin)}};
    if (j.kind != JointKind::kFixed) jj["limits"] = {j.lower, j.upper};
    doc["joints"].push_back(jj);
  }
  doc["parts"] = json::array();
  for (const auto& p : asset.parts) {
    doc["parts"].push_back({{"part_id", p.part_id},
                            {"semantic_class", std::string(to_string(p.semantic_class))},
                            {"owning_link", p.owning_link},
                            {"meshes", p.mesh_files},
                            {"actionable", p.actionable}});
    for (std::size_t m = 0; m < p.source_meshes.size(); ++m) {
      std::filesystem::create_directories((dir / p.mesh_files[m]).parent_path(), ec);
      write_mesh(dir / p.mesh_files[m], p.source_meshes[m]);
    }
  }
  std::ofstream out(dir / "asset.json");
  if (!out) throw IoError("cannot write " + (dir / "asset.json").string());
  out << doc.dump(2) << '\n';
}

ArticulatedAsset fuse_part_meshes(ArticulatedAsset asset, double weld_tolerance) {
  for (auto& part : asset.parts) {
    if (part.source_meshes.empty()) throw ValidationError("part '" + part.part_id + "' has no meshes to fuse");
    TriMesh fused = weld(part.source_meshes, weld_tolerance);
    if (fused.empty()) throw ValidationError("part '" + part.part_id + "' fused to an empty mesh");
    part.fused_mesh = std::move(fused);
  }
  return asset;
}

Rigid joint_motion(const Joint& joint, double value) {
  Rigid m = Rigid::Identity();
  switch (joint.kind) {
    case JointKind::kRevolute: m.linear() = Eigen::AngleAxisd(value, joint.axis).toRotationMatrix(); break;
    case JointKind::kPrismatic: m.translation() = value * joint.axis; break;
    case JointKind::kFixed: break;
  }
  return m;
}

KinematicState forward_kinematics(const ArticulatedAsset& asset, const JointConfig& config) {
  if (config.values.size() != asset.joints.size())
    throw ValidationError("joint config has " + std::to_string(config.values.size()) + " values, asset has " +
                          std::to_string(asset.joints.size()) + " joints");
  KinematicState state;
  state.links.assign(asset.links.size(), Rigid::Identity());
  state.links[asset.root_link()] = asset.base_frame;
  for (auto j : asset.joint_order()) {
    const Joint& joint = asset.joints[j];
    const double v = config.values[j];
    if (!(v >= joint.lower && v <= joint.upper))
      throw ValidationError("joint '" + joint.name + "' value " + std::to_string(v) + " outside [" +
                            std::to_string(joint.lower) + ", " + std::to_string(joint.upper) + "]");
    const auto parent = asset.link_index(joint.parent);
    const auto child = asset.link_index(joint.child);
    state.links[child] = state.links[parent] * joint.origin * joint_motion(joint, v);
  }
  for (const auto& part : asset.parts) state.parts.push_back(state.links[asset.link_index(part.owning_link)]);
  return state;
}

Aabb world_bounds(const ArticulatedAsset& asset, const KinematicState& state) {
  Aabb box;
  for (std::size_t l = 0; l < asset.links.size(); ++l)
    for (const auto& m : asset.links[l].meshes)
      for (const auto& v : m.vertices) box.extend(state.links[l] * v);
  for (std::size_t p = 0; p < asset.parts.size(); ++p) {
    const auto& part = asset.parts[p];
    if (part.fused_mesh) {
      for (const auto& v : part.fused_mesh->vertices) box.extend(state.parts[p] * v);
    } else {
      for (const auto& m : part.source_meshes)
        for (const auto& v : m.vertices) box.extend(state.parts[p] * v);
    }
  }
  return box;
}

}  // namespace partpose
