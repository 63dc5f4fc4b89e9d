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

#include <cstdlib>
#include <json.hpp>
#include <sys/wait.h>

#include "partpose/archive.hpp"
#include "test_util.hpp"

using namespace partpose;
using partpose::testing::read_text;
using partpose::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const std::string kSmall = " --n 16 --views 8 --angles 4 --depths 2 --depth-values 0.01,0.02";

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PARTPOSE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("make-demo-asset then annotate-part writes an archive") {
  TempDir dir;
  REQUIRE(run("make-demo-asset --out " + (dir / "cab").string(), dir / "log") == 0);
  const std::string args = "annotate-part --asset " + (dir / "cab/asset.json").string() +
                           " --part door_handle --seed 7 --threads 2" + kSmall + " --out " + (dir / "d").string();
  REQUIRE(run(args, dir / "log") == 0);
  const Archive a = read_archive(dir / "d");
  REQUIRE(a.parts.size() == 1);
  CHECK(a.parts[0].part_id == "door_handle");
  CHECK(a.parts[0].records.size() == 16u * 8u * 4u * 2u);
  CHECK(a.settings.root_seed == 7);
  CHECK(a.scenes.empty());
}

TEST_CASE("eval-depth on identical files reports zeros") {
  TempDir dir;
  REQUIRE(run("make-demo-asset --out " + (dir / "cab").string(), dir / "log") == 0);
  REQUIRE(run("render-depth --asset " + (dir / "cab/asset.json").string() +
                  " --seed 3 --width 64 --height 48 --fx 50 --fy 50 --cx 31.5 --cy 23.5 --out " + (dir / "r").string(),
              dir / "log") == 0);
  const auto png = (dir / "r/depth.png").string();
  REQUIRE(run("eval-depth --est " + png + " --gt " + png + " --disparity --fx 50 --report " +
                  (dir / "m.json").string(),
              dir / "log") == 0);
  const auto m = nlohmann::json::parse(read_text(dir / "m.json"));
  CHECK(m["rmse"] == 0.0);
  CHECK(m["mae"] == 0.0);
  CHECK(m["rel"] == 0.0);
  CHECK(m["epe"] == 0.0);
  CHECK(m["delta_1.05"] == 100.0);
  CHECK(m["valid_pixels"].get<int>() > 0);
}

TEST_CASE("bench-filter counts do not depend on threads") {
  TempDir dir;
  const std::string base = "bench-filter --points 5000 --n 32 --views 16 --angles 6 --depths 2";
  REQUIRE(run(base + " --threads 1 --report " + (dir / "a.json").string(), dir / "log") == 0);
  REQUIRE(run(base + " --threads 8 --report " + (dir / "b.json").string(), dir / "log") == 0);
  const auto a = nlohmann::json::parse(read_text(dir / "a.json"));
  const auto b = nlohmann::json::parse(read_text(dir / "b.json"));
  CHECK(a["counts"] == b["counts"]);
  CHECK(a["counts"]["survivors"].get<long>() > 0);
  CHECK(a["threads"] == 1);
  CHECK(b["threads"] == 8);
  CHECK(a["stage_ms"].contains("collision"));
}

TEST_CASE("annotate-scene replays byte-identically from its manifest") {
  TempDir dir;
  REQUIRE(run("make-demo-asset --out " + (dir / "cab").string(), dir / "log") == 0);
  REQUIRE(run("annotate-scene --asset " + (dir / "cab/asset.json").string() +
                  " --part door_handle --part drawer --seed 5 --scenes 1 --object-views 1 --part-views 1"
                  " --width 64 --height 48 --fx 50 --fy 50 --cx 31.5 --cy 23.5 --threads 1" +
                  kSmall + " --out " + (dir / "a").string(),
              dir / "log") == 0);
  REQUIRE(run("annotate-scene --replay " + (dir / "a/manifest.json").string() + " --threads 3 --out " +
                  (dir / "b").string(),
              dir / "log") == 0);
  const Archive a = read_archive(dir / "a");
  CHECK(a.scenes.size() == 2);
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "a");
    CAPTURE(rel.string());
    CHECK(read_text(e.path()) == read_text(dir / "b" / rel));
  }
}

TEST_CASE("export-poses writes a mesh") {
  TempDir dir;
  REQUIRE(run("make-demo-asset --out " + (dir / "cab").string(), dir / "log") == 0);
  REQUIRE(run("annotate-part --asset " + (dir / "cab/asset.json").string() + " --part door_handle" + kSmall +
                  " --out " + (dir / "d").string(),
              dir / "log") == 0);
  REQUIRE(run("export-poses --poses " + (dir / "d").string() + " --part door_handle --limit 10 --out " +
                  (dir / "g.obj").string(),
              dir / "log") == 0);
  CHECK(read_mesh(dir / "g.obj").faces.size() > 0);
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(run("bench-filter --no-such-flag", dir / "log") == 1);
  CHECK(read_text(dir / "log").find("Usage") != std::string::npos);
  CHECK(run("frobnicate", dir / "log") == 1);
  CHECK(run("annotate-part --asset " + (dir / "missing.json").string() + " --out " + (dir / "o").string(),
            dir / "log") == 2);
  CHECK(run("eval-depth --est " + (dir / "none.png").string() + " --gt " + (dir / "none.png").string(),
            dir / "log") == 2);
  partpose::testing::write_text(dir / "bad.json", "{\"links\": []}");
  CHECK(run("annotate-part --asset " + (dir / "bad.json").string() + " --out " + (dir / "o").string(), dir / "log") ==
        1);
}
