// Copyright 2026 The srdet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>

#include "srdet/srdet.hpp"
#include "test_util.hpp"

namespace srdet {
namespace {

namespace fs = std::filesystem;
using testing::read_text;
using testing::run_command;

const std::string kCli = SRDET_CLI;

// Two synthetic frames with scenes and ground truth on disk.
class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("cli") {
    fs::create_directories(dir_ / "frames");
    fs::create_directories(dir_ / "scenes");
    SceneParams p;
    p.min_area = 16;
    p.max_area = 256;
    GroundTruth gt;
    int ann = 1;
    for (int i = 1; i <= 2; ++i) {
      const std::string name = "frame_" + std::to_string(i);
      auto [scene, img] = generate_scene(40 + i, p, name);
      save_png(img, dir_ / "frames" / (name + ".png"));
      save_scene(scene, dir_ / "scenes" / (name + ".scene.json"));
      gt.images.push_back({i, scene.frame_w, scene.frame_h, name + ".png"});
      for (const auto& o : scene.objects) {
        gt.annotations.push_back({ann++, i, double(o.x), double(o.y), double(o.w), double(o.h),
                                  o.class_id, double(o.area())});
      }
    }
    write_text_file(dir_ / "gt.json", ground_truth_to_json(gt).dump());
    std::ofstream(dir_ / "run.conf") << "# test run\n"
                                     << "frames_dir = " << (dir_ / "frames").string() << "\n"
                                     << "backend = oracle:" << (dir_ / "scenes").string() << "\n"
                                     << "gt = " << (dir_ / "gt.json").string() << "\n"
                                     << "parallel_windows = 2\n";
  }

  int enhance(const std::string& out, const std::string& extra = "") {
    return run_command("env -u SRD_BACKEND " + kCli + " enhance --config " +
                       (dir_ / "run.conf").string() + " --output_dir " + (dir_ / out).string() +
                       " " + extra + " 2>/dev/null");
  }

  testing::TempDir dir_;
};

TEST_F(CliTest, EnhanceWritesOutputsAndIsDeterministic) {
  ASSERT_EQ(enhance("out1"), 0);
  for (const char* f : {"summary.csv", "predictions_base.json", "predictions_merged.json",
                        "comparison.csv", "counts.csv", "counts.png",
                        "predictions/frame_1.base.json", "predictions/frame_2.merged.json",
                        "annotated/frame_1.base.png", "annotated/frame_1.merged.png",
                        "annotated/frame_2.base.png", "annotated/frame_2.merged.png"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out1" / f)) << f;
  }
  ASSERT_EQ(enhance("out2", "--parallel_windows 1"), 0);
  for (const char* f : {"summary.csv", "predictions_base.json", "predictions_merged.json",
                        "predictions/frame_1.merged.json", "comparison.csv"}) {
    EXPECT_EQ(read_text(dir_ / "out1" / f), read_text(dir_ / "out2" / f)) << f;
  }
  const std::string csv = read_text(dir_ / "out1" / "summary.csv");
  EXPECT_EQ(csv.rfind("# zoom=2 upscale=bicubic denoise=on", 0), 0u);
}

TEST_F(CliTest, NoDenoiseIsRecorded) {
  ASSERT_EQ(enhance("out", "--denoise off"), 0);
  EXPECT_NE(read_text(dir_ / "out" / "summary.csv").find("denoise=off"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitTwoWithoutOutputs) {
  EXPECT_EQ(enhance("out", "--frames_dir " + (dir_ / "missing").string()), 2);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
  EXPECT_EQ(enhance("out", "--zoom 1"), 2);
  EXPECT_EQ(enhance("out", "--no_such_key 1"), 2);
  EXPECT_EQ(run_command(kCli + " enhance --config /no/such.conf 2>/dev/null"), 2);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, FrameErrorExitsOne) {
  save_png(ImageBuffer(160, 120), dir_ / "frames" / "orphan.png");
  EXPECT_EQ(enhance("out"), 1);
  EXPECT_NE(read_text(dir_ / "out" / "summary.csv").find("orphan,ERROR,ERROR"),
            std::string::npos);
}

TEST_F(CliTest, EnvironmentOverridesBackend) {
  const int rc = run_command("SRD_BACKEND=exec:" + std::string(SRDET_FAKE_BACKEND) +
                             "\\ detect " + kCli + " enhance --config " +
                             (dir_ / "run.conf").string() + " --output_dir " +
                             (dir_ / "out").string() + " 2>/dev/null");
  EXPECT_EQ(rc, 0);
  // The blob detector sees every object at score 0.9.
  EXPECT_NE(read_text(dir_ / "out" / "predictions_base.json").find("0.9"), std::string::npos);
}

TEST_F(CliTest, EvalIdenticalInputsGiveZeroDeltas) {
  ASSERT_EQ(enhance("out"), 0);
  const std::string preds = (dir_ / "out" / "predictions_base.json").string();
  ASSERT_EQ(run_command(kCli + " eval --gt " + (dir_ / "gt.json").string() + " --base " + preds +
                        " --enhanced " + preds + " --classes 3 --out " +
                        (dir_ / "eval").string() + " >/dev/null"),
            0);
  const std::string csv = read_text(dir_ / "eval" / "comparison.csv");
  EXPECT_EQ(csv.find("**"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "eval" / "counts.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "eval" / "counts.png"));
}

TEST_F(CliTest, EvalParseErrorsExitTwo) {
  write_text_file(dir_ / "bad.json", "[{");
  EXPECT_EQ(run_command(kCli + " eval --gt " + (dir_ / "bad.json").string() + " --base x --enhanced y 2>/dev/null"), 2);
  EXPECT_EQ(run_command(kCli + " eval --gt " + (dir_ / "gt.json").string() + " --base " +
                        (dir_ / "bad.json").string() + " --enhanced " +
                        (dir_ / "bad.json").string() + " --out " + (dir_ / "e").string() +
                        " 2>/dev/null"),
            2);
  EXPECT_EQ(run_command(kCli + " eval --gt 2>/dev/null"), 2);
}

TEST_F(CliTest, BenchIsDeterministicAndRecordsNoDenoise) {
  const std::string a = (dir_ / "bench_a").string();
  const std::string b = (dir_ / "bench_b").string();
  ASSERT_EQ(run_command(kCli + " bench --seed 3 --frames 4 --threads 2 --out " + a + " >/dev/null"), 0);
  ASSERT_EQ(run_command(kCli + " bench --seed 3 --frames 4 --threads 1 --out " + b + " >/dev/null"), 0);
  for (const char* f : {"summary.csv", "comparison.csv", "counts.csv", "gt.json",
                        "predictions_base.json", "predictions_merged.json"}) {
    EXPECT_EQ(read_text(fs::path(a) / f), read_text(fs::path(b) / f)) << f;
  }
  const std::string c = (dir_ / "bench_c").string();
  ASSERT_EQ(run_command(kCli + " bench --seed 3 --frames 2 --no-denoise --out " + c + " >/dev/null"), 0);
  EXPECT_NE(read_text(fs::path(c) / "summary.csv").find("denoise=off"), std::string::npos);
}

}  // namespace
}  // namespace srdet
