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
#ifndef SRDET_IMAGEBUF_HPP_
#define SRDET_IMAGEBUF_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srdet/detection.hpp"
#include "srdet/error.hpp"

namespace srdet {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Owned 8-bit RGB raster, row-major, three bytes per pixel.
class ImageBuffer {
 public:
  ImageBuffer() = default;

  ImageBuffer(int width, int height, Rgb fill = {})
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw PreconditionError("image dimensions must be >= 1, got " +
                              std::to_string(width) + "x" +
                              std::to_string(height));
    }
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
      pixels_[i] = fill.r;
      pixels_[i + 1] = fill.g;
      pixels_[i + 2] = fill.b;
    }
  }

  ImageBuffer(int width, int height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) {
      throw PreconditionError("image dimensions must be >= 1");
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * height * 3) {
      throw PreconditionError("pixel array length must be width*height*3");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  const std::uint8_t* row(int y) const {
    return pixels_.data() + static_cast<std::size_t>(y) * width_ * 3;
  }
  std::uint8_t* row(int y) {
    return pixels_.data() + static_cast<std::size_t>(y) * width_ * 3;
  }

  Rgb at(int x, int y) const {
    const std::uint8_t* p = row(y) + x * 3;
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    std::uint8_t* p = row(y) + x * 3;
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Copies the w x h rectangle at (left, top). The rectangle must lie inside
/// the image; clamping is the caller's job.
inline ImageBuffer crop(const ImageBuffer& img, int left, int top, int w,
                        int h) {
  if (left < 0 || top < 0 || w < 1 || h < 1 || left + w > img.width() ||
      top + h > img.height()) {
    throw PreconditionError(
        "crop rectangle (" + std::to_string(left) + "," + std::to_string(top) +
        "," + std::to_string(w) + "," + std::to_string(h) +
        ") outside image " + std::to_string(img.width()) + "x" +
        std::to_string(img.height()));
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* src = img.row(top + y) + left * 3;
    std::copy(src, src + w * 3, out.data() + static_cast<std::size_t>(y) * w * 3);
  }
  return ImageBuffer(w, h, std::move(out));
}

inline ImageBuffer mirror_horizontal(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.set(img.width() - 1 - x, y, img.at(x, y));
    }
  }
  return out;
}

namespace detail {

// 3x5 bitmap glyphs, one 3-bit row per entry (MSB = leftmost column).
struct Glyph {
  char ch;
  std::array<std::uint8_t, 5> rows;
};

inline constexpr std::array<Glyph, 42> kGlyphs = {{
    {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}},
    {'3', {7, 1, 7, 1, 7}}, {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}},
    {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 1, 2, 2}}, {'8', {7, 5, 7, 5, 7}},
    {'9', {7, 5, 7, 1, 7}}, {'A', {2, 5, 7, 5, 5}}, {'B', {6, 5, 6, 5, 6}},
    {'C', {3, 4, 4, 4, 3}}, {'D', {6, 5, 5, 5, 6}}, {'E', {7, 4, 6, 4, 7}},
    {'F', {7, 4, 6, 4, 4}}, {'G', {3, 4, 5, 5, 3}}, {'H', {5, 5, 7, 5, 5}},
    {'I', {7, 2, 2, 2, 7}}, {'J', {1, 1, 1, 5, 2}}, {'K', {5, 5, 6, 5, 5}},
    {'L', {4, 4, 4, 4, 7}}, {'M', {5, 7, 7, 5, 5}}, {'N', {6, 5, 5, 5, 5}},
    {'O', {2, 5, 5, 5, 2}}, {'P', {6, 5, 6, 4, 4}}, {'Q', {2, 5, 5, 6, 3}},
    {'R', {6, 5, 6, 5, 5}}, {'S', {3, 4, 2, 1, 6}}, {'T', {7, 2, 2, 2, 2}},
    {'U', {5, 5, 5, 5, 7}}, {'V', {5, 5, 5, 5, 2}}, {'W', {5, 5, 7, 7, 5}},
    {'X', {5, 5, 2, 5, 5}}, {'Y', {5, 5, 2, 2, 2}}, {'Z', {7, 1, 2, 4, 7}},
    {'.', {0, 0, 0, 0, 2}}, {':', {0, 2, 0, 2, 0}}, {'-', {0, 0, 7, 0, 0}},
    {'_', {0, 0, 0, 0, 7}}, {'%', {5, 1, 2, 4, 5}}, {'/', {1, 1, 2, 4, 4}},
}};

inline const Glyph* find_glyph(char ch) {
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (const Glyph& g : kGlyphs) {
    if (g.ch == up) return &g;
  }
  return nullptr;
}

inline void fill_rect(ImageBuffer& img, int x0, int y0, int x1, int y1,
                      Rgb c) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width() - 1);
  y1 = std::min(y1, img.height() - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) img.set(x, y, c);
  }
}

inline void put_pixel_clipped(ImageBuffer& img, int x, int y, Rgb c) {
  if (img.contains(x, y)) img.set(x, y, c);
}

}  // namespace detail

/// Returns a copy of `img` with a 1-px outline around `det` and, when
/// `label` is non-empty, a filled label strip holding the text in a 3x5
/// pixel font. The box covers pixels floor(a)..ceil(c)-1 horizontally and
/// likewise vertically; everything is clipped to the image.
inline ImageBuffer draw_box(const ImageBuffer& img, const Detection& det,
                            Rgb color, std::string_view label) {
  ImageBuffer out = img;
  const int w = img.width();
  const int h = img.height();
  int x0 = static_cast<int>(std::floor(det.a));
  int y0 = static_cast<int>(std::floor(det.b));
  int x1 = static_cast<int>(std::ceil(det.c)) - 1;
  int y1 = static_cast<int>(std::ceil(det.d)) - 1;
  x1 = std::max(x1, x0);
  y1 = std::max(y1, y0);
  x0 = std::clamp(x0, 0, w - 1);
  x1 = std::clamp(x1, 0, w - 1);
  y0 = std::clamp(y0, 0, h - 1);
  y1 = std::clamp(y1, 0, h - 1);

  for (int x = x0; x <= x1; ++x) {
    out.set(x, y0, color);
    out.set(x, y1, color);
  }
  for (int y = y0; y <= y1; ++y) {
    out.set(x0, y, color);
    out.set(x1, y, color);
  }

  if (label.empty()) return out;

  // Strip sits just above the box, or inside its top edge when there is no
  // room above.
  constexpr int kStripH = 7;
  const int strip_w = static_cast<int>(label.size()) * 4 + 1;
  int sy0 = y0 - kStripH;
  if (sy0 < 0) sy0 = y0 + 1;
  detail::fill_rect(out, x0, sy0, x0 + strip_w - 1, sy0 + kStripH - 1, color);

  const int luma = (299 * color.r + 587 * color.g + 114 * color.b) / 1000;
  const Rgb ink = luma > 127 ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
  int pen_x = x0 + 1;
  for (char ch : label) {
    if (const detail::Glyph* g = detail::find_glyph(ch)) {
      for (int gy = 0; gy < 5; ++gy) {
        for (int gx = 0; gx < 3; ++gx) {
          if (g->rows[gy] & (4 >> gx)) {
            detail::put_pixel_clipped(out, pen_x + gx, sy0 + 1 + gy, ink);
          }
        }
      }
    }
    pen_x += 4;
  }
  return out;
}

}  // namespace srdet

#endif  // SRDET_IMAGEBUF_HPP_
