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

#include <cmath>
#include <random>

#include "nlm_reference.hpp"
#include "srdet/denoise.hpp"
#include "test_util.hpp"

namespace srdet {
namespace {

using reference::brute_force_nlm;
using reference::max_abs_diff;
using reference::mirror_index;
using reference::residual_variance;
using reference::with_noise;

TEST(Reflect101, Examples) {
  EXPECT_EQ(reflect101(-1, 5), 1);
  EXPECT_EQ(reflect101(-2, 5), 2);
  EXPECT_EQ(reflect101(5, 5), 3);
  EXPECT_EQ(reflect101(0, 1), 0);
  for (int i = -30; i < 30; ++i) EXPECT_EQ(reflect101(i, 7), mirror_index(i, 7)) << i;
}

TEST(Nlm, ConstantImageIsFixedPoint) {
  const ImageBuffer img(40, 37, Rgb{17, 200, 93});
  EXPECT_EQ(nlm_denoise(img, {}), img);
  EXPECT_EQ(nlm_denoise(img, {3, 2, 5, 1}), img);
}

TEST(Nlm, ImpulseKeptAtDefaultStrength) {
  // With h = 10 every other patch differs from the impulse patch by
  // d2 >= 1327, so its weight is below e^-13 and the impulse survives.
  ImageBuffer img(15, 15, Rgb{0, 0, 0});
  img.set(7, 7, Rgb{255, 255, 255});
  const ImageBuffer out = nlm_denoise(img, {});
  EXPECT_EQ(out.at(7, 7).r, 255);
  EXPECT_LE(max_abs_diff(out, brute_force_nlm(img, {})), 1);
}

TEST(Nlm, ImpulseIsReducedMoreThanNeighboursChange) {
  ImageBuffer img(15, 15, Rgb{0, 0, 0});
  img.set(7, 7, Rgb{255, 255, 255});
  NlmParams p;
  p.h = 50;
  const ImageBuffer out = nlm_denoise(img, p);
  EXPECT_LE(max_abs_diff(out, brute_force_nlm(img, p)), 1);
  const int reduction = 255 - out.at(7, 7).r;
  EXPECT_GT(reduction, 0);
  for (int y = 4; y <= 10; ++y) {
    for (int x = 4; x <= 10; ++x) {
      if (x == 7 && y == 7) continue;
      EXPECT_LT(out.at(x, y).r, reduction) << x << "," << y;
    }
  }
}

TEST(Nlm, MatchesBruteForceOnFuzz) {
  std::mt19937 rng(21);
  for (int c = 0; c < 12; ++c) {
    NlmParams p;
    p.h = 4 + (rng() % 200) / 10.0;
    p.patch_radius = 1 + static_cast<int>(rng() % 3);
    p.search_radius = p.patch_radius + static_cast<int>(rng() % 5);
    p.sigma = (rng() % 3) * 2.5;
    ImageBuffer img = testing::random_image(32, 32, c);
    if (c % 2 == 0) img = with_noise(ImageBuffer(32, 32, Rgb{90, 120, 150}), 12, c);
    EXPECT_LE(max_abs_diff(nlm_denoise(img, p), brute_force_nlm(img, p)), 1) << "case " << c;
  }
}

TEST(Nlm, DefaultsReduceNoiseVariance) {
  const ImageBuffer clean(64, 64, Rgb{128, 128, 128});
  const ImageBuffer noisy = with_noise(clean, 10, 1234);
  const double before = residual_variance(noisy, clean);
  const double after = residual_variance(nlm_denoise(noisy, {}), clean);
  EXPECT_NEAR(before, 100, 10);
  EXPECT_LE(after, 0.7 * before);
}

TEST(Nlm, ThreadCountDoesNotChangeOutput) {
  const ImageBuffer img = with_noise(testing::random_image(50, 100, 3), 8, 4);
  const ImageBuffer one = nlm_denoise(img, {}, 1);
  for (int t : {2, 3, 8}) EXPECT_EQ(nlm_denoise(img, {}, t), one) << t;
}

TEST(Nlm, MirrorEquivariant) {
  const ImageBuffer img = with_noise(testing::random_image(33, 20, 9), 10, 2);
  EXPECT_EQ(nlm_denoise(mirror_horizontal(img), {}), mirror_horizontal(nlm_denoise(img, {})));
}

TEST(Nlm, OutputStaysWithinInputRange) {
  const ImageBuffer img = testing::random_image(24, 24, 77);
  const ImageBuffer out = nlm_denoise(img, {});
  std::uint8_t lo = 255, hi = 0;
  for (auto v : img.pixels()) lo = std::min(lo, v), hi = std::max(hi, v);
  for (auto v : out.pixels()) {
    EXPECT_GE(v, lo);
    EXPECT_LE(v, hi);
  }
}

TEST(Nlm, Preconditions) {
  EXPECT_THROW(nlm_denoise(ImageBuffer(5, 20), {}), PreconditionError);
  EXPECT_THROW(nlm_denoise(ImageBuffer(20, 20), {0, 3, 10, 0}), PreconditionError);
  EXPECT_THROW(nlm_denoise(ImageBuffer(20, 20), {10, 3, 2, 0}), PreconditionError);
}

TEST(NoiseSigma, ConstantIsZero) {
  EXPECT_EQ(estimate_noise_sigma(ImageBuffer(20, 20, Rgb{50, 60, 70})), 0.0);
}

TEST(NoiseSigma, RecoversSyntheticSigma) {
  const ImageBuffer noisy = with_noise(ImageBuffer(64, 64, Rgb{128, 128, 128}), 10, 99);
  const double s = estimate_noise_sigma(noisy);
  EXPECT_GE(s, 7);
  EXPECT_LE(s, 13);
}

TEST(NoiseSigma, CheckerboardIsFinite) {
  ImageBuffer img(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      img.set(x, y, (x + y) % 2 ? Rgb{255, 255, 255} : Rgb{0, 0, 0});
    }
  }
  EXPECT_TRUE(std::isfinite(estimate_noise_sigma(img)));
  EXPECT_THROW(estimate_noise_sigma(ImageBuffer(2, 5)), PreconditionError);
}

}  // namespace
}  // namespace srdet
