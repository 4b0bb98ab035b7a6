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
#ifndef SRDET_SUPERRES_HPP_
#define SRDET_SUPERRES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "srdet/error.hpp"
#include "srdet/imagebuf.hpp"
#include "srdet/transport.hpp"
#include "srdet/wire.hpp"

namespace srdet {

enum class UpscaleKind { kNearest, kBicubic, kExternal };

struct UpscaleMethod {
  UpscaleKind kind = UpscaleKind::kBicubic;
  std::string backend_uri;  // external only
  int timeout_ms = 60000;

  void check() const {
    if (kind == UpscaleKind::kExternal && backend_uri.empty()) {
      throw PreconditionError("external upscaling requires a backend URI");
    }
  }
};

inline const char* to_string(UpscaleKind k) {
  switch (k) {
    case UpscaleKind::kNearest:
      return "nearest";
    case UpscaleKind::kBicubic:
      return "bicubic";
    case UpscaleKind::kExternal:
      return "external";
  }
  return "?";
}

inline UpscaleKind parse_upscale_kind(const std::string& s) {
  if (s == "nearest") return UpscaleKind::kNearest;
  if (s == "bicubic") return UpscaleKind::kBicubic;
  if (s == "external") return UpscaleKind::kExternal;
  throw ConfigError("unknown upscale method '" + s + "'");
}

/// Catmull-Rom kernel (a = -0.5).
inline double catmull_rom(double t) {
  t = std::abs(t);
  if (t < 1) return (1.5 * t - 2.5) * t * t + 1;
  if (t < 2) return ((-0.5 * t + 2.5) * t - 4) * t + 2;
  return 0;
}

inline ImageBuffer upscale_nearest(const ImageBuffer& img, int zoom) {
  ImageBuffer out(img.width() * zoom, img.height() * zoom);
  for (int y = 0; y < out.height(); ++y) {
    const std::uint8_t* src = img.row(y / zoom);
    std::uint8_t* dst = out.row(y);
    for (int x = 0; x < out.width(); ++x) {
      const std::uint8_t* p = src + (x / zoom) * 3;
      dst[x * 3] = p[0];
      dst[x * 3 + 1] = p[1];
      dst[x * 3 + 2] = p[2];
    }
  }
  return out;
}

namespace detail {

struct Taps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
};

// Pixel-center aligned: output pixel X samples source position
// (X + 0.5) / zoom - 0.5. Indices are clamped to the image edge.
inline std::vector<Taps> make_taps(int in_len, int zoom) {
  std::vector<Taps> taps(static_cast<std::size_t>(in_len) * zoom);
  for (int x = 0; x < in_len * zoom; ++x) {
    const double src = (x + 0.5) / zoom - 0.5;
    const int base = static_cast<int>(std::floor(src));
    const double frac = src - base;
    Taps& t = taps[x];
    for (int k = 0; k < 4; ++k) {
      t.index[k] = std::clamp(base - 1 + k, 0, in_len - 1);
      t.weight[k] = catmull_rom(frac - (k - 1));
    }
  }
  return taps;
}

}  // namespace detail

/// Separable Catmull-Rom bicubic. Rows are filtered in double precision and
/// each output channel is rounded half-up and clamped to [0, 255].
inline ImageBuffer upscale_bicubic(const ImageBuffer& img, int zoom) {
  const int in_w = img.width();
  const int in_h = img.height();
  const int out_w = in_w * zoom;
  const int out_h = in_h * zoom;
  const auto xtaps = detail::make_taps(in_w, zoom);
  const auto ytaps = detail::make_taps(in_h, zoom);

  // Horizontal pass into a double buffer of size out_w x in_h.
  std::vector<double> tmp(static_cast<std::size_t>(out_w) * in_h * 3);
  for (int y = 0; y < in_h; ++y) {
    const std::uint8_t* src = img.row(y);
    double* dst = tmp.data() + static_cast<std::size_t>(y) * out_w * 3;
    for (int x = 0; x < out_w; ++x) {
      const auto& t = xtaps[x];
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0;
        for (int k = 0; k < 4; ++k) acc += t.weight[k] * src[t.index[k] * 3 + ch];
        dst[x * 3 + ch] = acc;
      }
    }
  }

  ImageBuffer out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const auto& t = ytaps[y];
    std::uint8_t* dst = out.row(y);
    for (int x = 0; x < out_w * 3; ++x) {
      double acc = 0;
      for (int k = 0; k < 4; ++k) {
        acc += t.weight[k] * tmp[static_cast<std::size_t>(t.index[k]) * out_w * 3 + x];
      }
      dst[x] = static_cast<std::uint8_t>(std::clamp(std::floor(acc + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

/// Round-trips the image through an external super-resolution service.
class RemoteUpscaler {
 public:
  explicit RemoteUpscaler(std::unique_ptr<LineChannel> channel)
      : channel_(std::move(channel)) {}

  ImageBuffer upscale(const ImageBuffer& img, int zoom) {
    const std::uint64_t id = wire::next_request_id();
    channel_->send_line(wire::encode_upscale_request(img, zoom, id));
    return wire::decode_upscale_response(channel_->recv_line(), id, img.width(),
                                         img.height(), zoom);
  }

 private:
  std::unique_ptr<LineChannel> channel_;
};

/// Returns an image of exactly (zoom * w) x (zoom * h).
inline ImageBuffer upscale(const ImageBuffer& img, int zoom,
                           const UpscaleMethod& method) {
  if (zoom < 2) throw PreconditionError("zoom must be an integer >= 2");
  if (img.empty()) throw PreconditionError("cannot upscale an empty image");
  method.check();
  switch (method.kind) {
    case UpscaleKind::kNearest:
      return upscale_nearest(img, zoom);
    case UpscaleKind::kBicubic:
      return upscale_bicubic(img, zoom);
    case UpscaleKind::kExternal:
      try {
        RemoteUpscaler remote(open_channel(method.backend_uri, method.timeout_ms));
        return remote.upscale(img, zoom);
      } catch (const Error& e) {
        throw UpscaleError(std::string("external upscaler failed: ") + e.what());
      }
  }
  throw PreconditionError("unknown upscale method");
}

}  // namespace srdet

#endif  // SRDET_SUPERRES_HPP_
