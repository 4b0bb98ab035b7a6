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
#ifndef SRDET_REPORT_HPP_
#define SRDET_REPORT_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "srdet/evalmap.hpp"
#include "srdet/imagebuf.hpp"

namespace srdet {

inline constexpr Rgb kBaseColor{220, 40, 40};
inline constexpr Rgb kEnhancedColor{30, 160, 60};

/// Static count-vs-frame scatter: base counts in red, enhanced in green.
inline ImageBuffer render_count_plot(const Comparison& c, int width = 640, int height = 320) {
  ImageBuffer img(width, height, Rgb{255, 255, 255});
  constexpr int kMargin = 24;
  const Rgb axis{0, 0, 0};
  const int x0 = kMargin;
  const int y0 = height - kMargin;
  const int x1 = width - kMargin / 2;
  const int y1 = kMargin / 2;
  for (int x = x0; x <= x1; ++x) img.set(x, y0, axis);
  for (int y = y1; y <= y0; ++y) img.set(x0, y, axis);

  const std::size_t n = c.base_counts.size();
  std::size_t max_count = 1;
  for (const auto& f : c.base_counts) max_count = std::max(max_count, f.detections);
  for (const auto& f : c.enhanced_counts) max_count = std::max(max_count, f.detections);

  auto plot = [&](std::size_t i, std::size_t count, Rgb color) {
    const int px = x0 + 3 + static_cast<int>(n > 1 ? i * (x1 - x0 - 6) / (n - 1) : 0);
    const int py = y0 - static_cast<int>(count * static_cast<std::size_t>(y0 - y1) / max_count);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (img.contains(px + dx, py + dy)) img.set(px + dx, py + dy, color);
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) plot(i, c.base_counts[i].detections, kBaseColor);
  for (std::size_t i = 0; i < c.enhanced_counts.size(); ++i) {
    plot(i, c.enhanced_counts[i].detections, kEnhancedColor);
  }
  // Legend.
  img = draw_box(img, Detection{x0 + 6.0, y1 + 2.0, x0 + 7.0, y1 + 3.0, 1, 1}, kBaseColor, "base");
  img = draw_box(img, Detection{x0 + 46.0, y1 + 2.0, x0 + 47.0, y1 + 3.0, 1, 1}, kEnhancedColor,
                 "enhanced");
  img = draw_box(img, Detection{0, static_cast<double>(y1), 1, y1 + 1.0, 1, 1}, Rgb{255, 255, 255},
                 std::to_string(max_count));
  return img;
}

}  // namespace srdet

#endif  // SRDET_REPORT_HPP_
