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

#include "srdet/superres.hpp"
#include "test_util.hpp"

namespace srdet {
namespace {

// Keys' cubic convolution kernel with a = -0.5, written out piecewise.
double keys(double t) {
  const double a = -0.5;
  t = std::fabs(t);
  if (t <= 1) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
  if (t < 2) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
  return 0;
}

// Direct 4x4 evaluation at output (X, Y), channel ch.
int reference_bicubic(const ImageBuffer& img, int zoom, int X, int Y, int ch) {
  const double sx = (X + 0.5) / zoom - 0.5;
  const double sy = (Y + 0.5) / zoom - 0.5;
  const int bx = static_cast<int>(std::floor(sx));
  const int by = static_cast<int>(std::floor(sy));
  double acc = 0;
  for (int j = by - 1; j <= by + 2; ++j) {
    for (int i = bx - 1; i <= bx + 2; ++i) {
      const int ci = std::clamp(i, 0, img.width() - 1);
      const int cj = std::clamp(j, 0, img.height() - 1);
      const Rgb p = img.at(ci, cj);
      const int v = ch == 0 ? p.r : ch == 1 ? p.g : p.b;
      acc += keys(sx - i) * keys(sy - j) * v;
    }
  }
  return static_cast<int>(std::clamp(std::floor(acc + 0.5), 0.0, 255.0));
}

TEST(Upscale, NearestSinglePixel) {
  const ImageBuffer out = upscale_nearest(ImageBuffer(1, 1, Rgb{7, 8, 9}), 3);
  EXPECT_EQ(out, ImageBuffer(3, 3, Rgb{7, 8, 9}));
}

TEST(Upscale, DimensionsAreExactForAllMethods) {
  std::mt19937 rng(5);
  for (int i = 0; i < 50; ++i) {
    const int w = 1 + static_cast<int>(rng() % 40);
    const int h = 1 + static_cast<int>(rng() % 40);
    const int z = 2 + static_cast<int>(rng() % 3);
    const ImageBuffer img = testing::random_image(w, h, i);
    for (UpscaleKind k : {UpscaleKind::kNearest, UpscaleKind::kBicubic}) {
      UpscaleMethod m;
      m.kind = k;
      const ImageBuffer out = upscale(img, z, m);
      EXPECT_EQ(out.width(), z * w);
      EXPECT_EQ(out.height(), z * h);
    }
  }
}

TEST(Upscale, NearestThenSubsampleIsIdentity) {
  for (int z = 2; z <= 4; ++z) {
    const ImageBuffer img = testing::random_image(13, 7, z);
    const ImageBuffer up = upscale_nearest(img, z);
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 13; ++x) EXPECT_EQ(up.at(x * z, y * z), img.at(x, y));
    }
  }
}

TEST(Upscale, BicubicKeepsConstants) {
  for (int z = 2; z <= 4; ++z) {
    const ImageBuffer img(9, 6, Rgb{0, 128, 255});
    EXPECT_EQ(upscale_bicubic(img, z), ImageBuffer(9 * z, 6 * z, Rgb{0, 128, 255}));
  }
}

TEST(Upscale, BicubicReproducesRampInterior) {
  ImageBuffer img(16, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 16; ++x) img.set(x, y, Rgb{uint8_t(8 * x), uint8_t(8 * x), 0});
  }
  const ImageBuffer up = upscale_bicubic(img, 2);
  // Interior columns: all four taps inside the image.
  for (int X = 4; X < 28; ++X) {
    const double expected = 8 * ((X + 0.5) / 2 - 0.5);
    EXPECT_LE(std::abs(up.at(X, 3).r - expected), 1.0) << X;
  }
}

TEST(Upscale, BicubicMatchesDirectEvaluation) {
  for (int z = 2; z <= 3; ++z) {
    const ImageBuffer img = testing::random_image(11, 9, 40 + z);
    const ImageBuffer up = upscale_bicubic(img, z);
    for (int Y = 0; Y < up.height(); ++Y) {
      for (int X = 0; X < up.width(); ++X) {
        const Rgb p = up.at(X, Y);
        EXPECT_NEAR(p.r, reference_bicubic(img, z, X, Y, 0), 1);
        EXPECT_NEAR(p.g, reference_bicubic(img, z, X, Y, 1), 1);
        EXPECT_NEAR(p.b, reference_bicubic(img, z, X, Y, 2), 1);
      }
    }
  }
}

TEST(Upscale, BicubicPreservesMeanApproximately) {
  const ImageBuffer img = testing::random_image(32, 32, 8);
  const ImageBuffer up = upscale_bicubic(img, 2);
  auto mean = [](const ImageBuffer& b) {
    double s = 0;
    for (auto v : b.pixels()) s += v;
    return s / static_cast<double>(b.pixels().size());
  };
  EXPECT_NEAR(mean(up), mean(img), 2.0);
}

TEST(Upscale, Preconditions) {
  EXPECT_THROW(upscale(ImageBuffer(2, 2), 1, {}), PreconditionError);
  EXPECT_THROW(upscale(ImageBuffer(), 2, {}), PreconditionError);
  UpscaleMethod external;
  external.kind = UpscaleKind::kExternal;
  EXPECT_THROW(upscale(ImageBuffer(2, 2), 2, external), PreconditionError);
  EXPECT_THROW(parse_upscale_kind("lanczos"), ConfigError);
  EXPECT_EQ(parse_upscale_kind("nearest"), UpscaleKind::kNearest);
}

TEST(Upscale, KernelValues) {
  EXPECT_EQ(catmull_rom(0), 1);
  EXPECT_EQ(catmull_rom(1), 0);
  EXPECT_EQ(catmull_rom(2), 0);
  EXPECT_DOUBLE_EQ(catmull_rom(0.5), keys(0.5));
  EXPECT_DOUBLE_EQ(catmull_rom(-1.5), keys(1.5));
}

}  // namespace
}  // namespace srdet
