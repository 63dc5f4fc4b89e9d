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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace partpose::ply {

// Column-oriented contents of one PLY element. Scalar properties are widened
// to double; list properties keep their integer entries.
struct Element {
  std::string name;
  std::size_t count = 0;
  std::map<std::string, std::vector<double>> scalars;
  std::map<std::string, std::vector<std::vector<std::int64_t>>> lists;

  bool has(const std::string& prop) const { return scalars.count(prop) != 0; }
  const std::vector<double>& column(const std::string& prop) const;
};

struct Data {
  std::vector<Element> elements;
  const Element* find(const std::string& name) const;
};

/// Reads binary (little or big endian) PLY. Throws ParseError on malformed
/// headers or truncated bodies, IoError when the file cannot be opened.
Data read(const std::filesystem::path& path);

}  // namespace partpose::ply
