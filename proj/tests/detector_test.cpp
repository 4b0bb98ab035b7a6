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

#include "test_util.hpp"

#include <atomic>
#include <thread>

#include "srdet/detector.hpp"

namespace srdet {
namespace {

class ScriptedBackend : public DetectorBackend {
 public:
  explicit ScriptedBackend(std::vector<Detection> out) : out_(std::move(out)) {}
  std::vector<Detection> infer(const ImageBuffer&, const DetectorConfig&,
                               const FrameContext&) override {
    return out_;
  }

 private:
  std::vector<Detection> out_;
};

class ThrowingBackend : public DetectorBackend {
 public:
  std::vector<Detection> infer(const ImageBuffer&, const DetectorConfig&,
                               const FrameContext&) override {
    throw IoError("socket gone");
  }
};

Detection box(double score, double x = 0) { return {x, 0, x + 1, 1, 3, score}; }

TEST(Detect, EmptyBackendGivesEmptySet) {
  ScriptedBackend b({});
  EXPECT_TRUE(detect(b, ImageBuffer(4, 4), {}).empty());
}

TEST(Detect, KeepsTopHundredOfOneFifty) {
  std::vector<Detection> raw;
  for (int i = 0; i < 150; ++i) raw.push_back(box(0.31 + i * 0.004, i));
  ScriptedBackend b(raw);
  const DetectionSet out = detect(b, ImageBuffer(4, 4), {});
  ASSERT_EQ(out.size(), 100u);
  // The 100 best are indices 50..149.
  double min_kept = 1;
  for (const Detection& d : out.items) min_kept = std::min(min_kept, d.score);
  EXPECT_DOUBLE_EQ(min_kept, 0.31 + 50 * 0.004);
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_GE(out.items[i - 1].score, out.items[i].score);
  }
}

TEST(Detect, MinScoreFilter) {
  ScriptedBackend b({box(0.9), box(0.31), box(0.29)});
  const DetectionSet out = detect(b, ImageBuffer(4, 4), {100, 0.3});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.items[0].score, 0.9);
  EXPECT_EQ(out.items[1].score, 0.31);
}

TEST(Detect, ScoreAtThresholdIsKept) {
  ScriptedBackend b({box(0.3)});
  EXPECT_EQ(detect(b, ImageBuffer(4, 4), {100, 0.3}).size(), 1u);
}

TEST(Detect, InvalidDetectionIsDetectionError) {
  ScriptedBackend b({{0, 0, 1, 1, 3, 1.5}});
  EXPECT_THROW(detect(b, ImageBuffer(4, 4), {}), DetectionError);
  ScriptedBackend inverted({{2, 0, 1, 1, 3, 0.5}});
  EXPECT_THROW(detect(inverted, ImageBuffer(4, 4), {}), DetectionError);
}

TEST(Detect, BackendFailureIsDetectionError) {
  ThrowingBackend b;
  EXPECT_THROW(detect(b, ImageBuffer(4, 4), {}), DetectionError);
}

TEST(Detect, EmptyImageRejected) {
  ScriptedBackend b({});
  EXPECT_THROW(detect(b, ImageBuffer(), {}), PreconditionError);
}

TEST(PostFilter, Idempotent) {
  std::vector<Detection> raw;
  for (int i = 0; i < 40; ++i) raw.push_back(box((i * 37 % 100) / 100.0, i % 7));
  const DetectorConfig cfg{10, 0.2};
  const auto once = post_filter(raw, cfg);
  EXPECT_EQ(post_filter(once, cfg), once);
  EXPECT_EQ(once.size(), 10u);
}

TEST(PostFilter, TiesAreOrderedByBox) {
  const auto out = post_filter({box(0.5, 3), box(0.5, 1), box(0.5, 2)}, {});
  EXPECT_EQ(out[0].a, 1);
  EXPECT_EQ(out[1].a, 2);
  EXPECT_EQ(out[2].a, 3);
}

TEST(DetectorConfig, Check) {
  EXPECT_THROW((DetectorConfig{0, 0.3}.check()), PreconditionError);
  EXPECT_THROW((DetectorConfig{10, 1.5}.check()), PreconditionError);
  EXPECT_NO_THROW((DetectorConfig{1, 0}.check()));
}

TEST(BackendPool, CreatesLazilyAndCapsInstances) {
  std::atomic<int> created{0};
  BackendPool pool(
      [&] {
        ++created;
        return std::make_unique<ScriptedBackend>(std::vector<Detection>{});
      },
      3);
  EXPECT_EQ(created, 0);
  {
    auto a = pool.acquire();
    auto b = pool.acquire();
    EXPECT_EQ(created, 2);
  }
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) {
        auto lease = pool.acquire();
        detect(*lease, ImageBuffer(2, 2), {});
      }
    });
  }
  threads.clear();
  EXPECT_LE(created, 3);
}

TEST(BackendPool, FactoryFailureReleasesSlot) {
  int calls = 0;
  BackendPool pool(
      [&]() -> std::unique_ptr<DetectorBackend> {
        if (++calls == 1) throw IoError("first connect fails");
        return std::make_unique<ScriptedBackend>(std::vector<Detection>{});
      },
      1);
  EXPECT_THROW(pool.acquire(), IoError);
  EXPECT_NO_THROW(pool.acquire());
}

}  // namespace
}  // namespace srdet
