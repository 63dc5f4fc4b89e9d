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

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "partpose/ply.hpp"
#include "partpose/scene.hpp"

namespace partpose {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_depth_png(const std::filesystem::path& path, const std::vector<double>& depth, int width, int height) {
  if (depth.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("depth buffer size does not match image dimensions");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<png_byte> row(static_cast<std::size_t>(width) * 2);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const double d = depth[static_cast<std::size_t>(v) * width + u];
      const double mm = std::round(d * 1000.0);
      // Out-of-range depths are stored as invalid.
      const std::uint16_t val = (d > 0.0 && mm <= 65535.0) ? static_cast<std::uint16_t>(mm) : 0;
      row[2 * u] = static_cast<png_byte>(val >> 8);  // PNG is big-endian
      row[2 * u + 1] = static_cast<png_byte>(val & 0xFF);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<double> read_depth_png(const std::filesystem::path& path, int* width, int* height) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw ParseError("not a PNG file: " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<double> depth;
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("corrupt PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const auto w = static_cast<int>(png_get_image_width(png, info));
  const auto h = static_cast<int>(png_get_image_height(png, info));
  const int bits = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (bits != 16 || color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("expected 16-bit grayscale depth PNG: " + path.string());
  }
  row.resize(static_cast<std::size_t>(w) * 2);
  depth.resize(static_cast<std::size_t>(w) * h);
  for (int v = 0; v < h; ++v) {
    png_read_row(png, row.data(), nullptr);
    for (int u = 0; u < w; ++u) {
      const std::uint16_t mm = static_cast<std::uint16_t>((row[2 * u] << 8) | row[2 * u + 1]);
      depth[static_cast<std::size_t>(v) * w + u] = mm / 1000.0;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (width) *width = w;
  if (height) *height = h;
  return depth;
}

namespace {

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 json_vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

void write_camera_json(const std::filesystem::path& path, const CameraIntrinsics& k, const CameraPose& camera) {
  nlohmann::json doc;
  doc["intrinsics"] = {{"width", k.width}, {"height", k.height}, {"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
  const Rigid t = camera.camera_to_world();
  nlohmann::json m = nlohmann::json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m.push_back(t.matrix()(r, c));
  doc["extrinsics"] = {{"camera_to_world", m},
                       {"position", vec_json(camera.position)},
                       {"target", vec_json(camera.target)},
                       {"up", vec_json(camera.up)},
                       {"latitude_deg", camera.latitude_deg},
                       {"longitude_deg", camera.longitude_deg},
                       {"radius", camera.radius}};
  doc["depth_units"] = "millimeters";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void read_camera_json(const std::filesystem::path& path, CameraIntrinsics& k, CameraPose& camera) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto& ji = doc.at("intrinsics");
    k.width = ji.at("width").get<int>();
    k.height = ji.at("height").get<int>();
    k.fx = ji.at("fx").get<double>();
    k.fy = ji.at("fy").get<double>();
    k.cx = ji.at("cx").get<double>();
    k.cy = ji.at("cy").get<double>();
    const auto& je = doc.at("extrinsics");
    camera.position = json_vec(je.at("position"));
    camera.target = json_vec(je.at("target"));
    camera.up = json_vec(je.at("up"));
    camera.latitude_deg = je.value("latitude_deg", 0.0);
    camera.longitude_deg = je.value("longitude_deg", 0.0);
    camera.radius = je.value("radius", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed camera sidecar " + path.string() + ": " + e.what());
  }
}

void write_cloud_ply(const std::filesystem::path& path, const std::vector<Vec3>& cloud,
                     const std::vector<std::int32_t>& labels) {
  if (cloud.size() != labels.size()) throw ValidationError("cloud and label counts differ");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nproperty int part_id\nend_header\n";
  std::vector<char> buf(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const float xyz[3] = {static_cast<float>(cloud[i].x()), static_cast<float>(cloud[i].y()),
                          static_cast<float>(cloud[i].z())};
    std::memcpy(buf.data() + 16 * i, xyz, 12);
    std::memcpy(buf.data() + 16 * i + 12, &labels[i], 4);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void read_cloud_ply(const std::filesystem::path& path, std::vector<Vec3>& cloud, std::vector<std::int32_t>& labels) {
  const auto data = ply::read(path);
  const auto* vert = data.find("vertex");
  if (!vert) throw ParseError("cloud PLY has no vertex element: " + path.string());
  const auto& xs = vert->column("x");
  const auto& ys = vert->column("y");
  const auto& zs = vert->column("z");
  const auto& ids = vert->column("part_id");
  cloud.clear();
  labels.clear();
  for (std::size_t i = 0; i < vert->count; ++i) {
    cloud.emplace_back(xs[i], ys[i], zs[i]);
    labels.push_back(static_cast<std::int32_t>(ids[i]));
  }
}

}  // namespace partpose
