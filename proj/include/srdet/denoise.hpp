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
#ifndef SRDET_DENOISE_HPP_
#define SRDET_DENOISE_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "srdet/error.hpp"
#include "srdet/imagebuf.hpp"

namespace srdet {

struct NlmParams {
  double h = 10;          // filtering strength, channel units
  int patch_radius = 3;   // 7x7 patches
  int search_radius = 10; // 21x21 search window
  double sigma = 0;       // noise estimate subtracted from patch distances

  void check() const {
    if (!(h > 0)) throw PreconditionError("NLM strength h must be > 0");
    if (patch_radius < 1) throw PreconditionError("patch_radius must be >= 1");
    if (search_radius < patch_radius) {
      throw PreconditionError("search_radius must be >= patch_radius");
    }
    if (!(sigma >= 0)) throw PreconditionError("sigma must be >= 0");
  }
};

/// Mirror index into [0, n) without repeating the edge sample
/// (... 2 1 | 0 1 2 ... n-1 | n-2 ...). Works for any distance outside.
inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

namespace detail {

inline constexpr int kWeightShift = 30;

// Fixed-point patch weight as a function of the integer sum of squared
// differences over a patch. Integer weights make the accumulation exact, so
// the result does not depend on summation order (row banding, mirroring).
class NlmWeights {
 public:
  NlmWeights(const NlmParams& p, int samples_per_patch)
      : inv_n_(1.0 / samples_per_patch),
        two_sigma2_(2 * p.sigma * p.sigma),
        inv_h2_(1.0 / (p.h * p.h)) {
    // Past this distance the weight rounds to zero in fixed point.
    const double max_d2 = two_sigma2_ + p.h * p.h * (kWeightShift + 1) * std::log(2.0);
    cutoff_ = static_cast<std::int64_t>(std::ceil(max_d2 * samples_per_patch)) + 1;
    const std::int64_t table_len = std::min<std::int64_t>(cutoff_, 1 << 20);
    table_.resize(static_cast<std::size_t>(table_len));
    for (std::int64_t s = 0; s < table_len; ++s) table_[s] = compute(s);
  }

  std::int64_t operator()(std::int64_t ssd) const {
    if (ssd < static_cast<std::int64_t>(table_.size())) return table_[ssd];
    if (ssd >= cutoff_) return 0;
    return compute(ssd);
  }

 private:
  std::int64_t compute(std::int64_t ssd) const {
    const double d2 = static_cast<double>(ssd) * inv_n_;
    const double w = std::exp(-std::max(d2 - two_sigma2_, 0.0) * inv_h2_);
    return std::llround(std::ldexp(w, kWeightShift));
  }

  double inv_n_;
  double two_sigma2_;
  double inv_h2_;
  std::int64_t cutoff_ = 0;
  std::vector<std::int64_t> table_;
};

}  // namespace detail

/// Non-local means over RGB patches. Each output pixel is the weighted mean
/// of the pixels in its search window, weight
/// exp(-max(d2 - 2 sigma^2, 0) / h^2), d2 the mean squared patch difference
/// over all three channels. Borders are mirrored (reflect101).
///
/// Patch distances come from a per-offset integral image of squared
/// differences. `threads` splits the rows; output is bit-identical for any
/// thread count.
inline ImageBuffer nlm_denoise(const ImageBuffer& img, const NlmParams& p,
                               int threads = 1) {
  p.check();
  const int W = img.width();
  const int H = img.height();
  const int r = p.patch_radius;
  const int S = p.search_radius;
  if (W < 2 * r + 1 || H < 2 * r + 1) {
    throw PreconditionError("image smaller than the NLM patch");
  }
  const int margin = r + S;
  const int PW = W + 2 * margin;
  const int PH = H + 2 * margin;

  // Mirrored copy so the inner loops never branch on borders.
  std::vector<std::uint8_t> pad(static_cast<std::size_t>(PW) * PH * 3);
  for (int y = 0; y < PH; ++y) {
    const std::uint8_t* src = img.row(reflect101(y - margin, H));
    std::uint8_t* dst = pad.data() + static_cast<std::size_t>(y) * PW * 3;
    for (int x = 0; x < PW; ++x) {
      const std::uint8_t* s = src + reflect101(x - margin, W) * 3;
      dst[x * 3] = s[0];
      dst[x * 3 + 1] = s[1];
      dst[x * 3 + 2] = s[2];
    }
  }
  auto px = [&](int x, int y) {  // image coords, may reach `margin` outside
    return pad.data() + (static_cast<std::size_t>(y + margin) * PW + (x + margin)) * 3;
  };

  const int patch_d = 2 * r + 1;
  const detail::NlmWeights weights(p, 3 * patch_d * patch_d);
  ImageBuffer out(W, H);

  constexpr int kBandRows = 32;
  const int n_bands = (H + kBandRows - 1) / kBandRows;

  auto run_band = [&](int band) {
    const int y0 = band * kBandRows;
    const int y1 = std::min(H, y0 + kBandRows);
    const int bh = y1 - y0;
    // Integral image over x in [-r, W + r), y in [y0 - r, y1 + r), with a
    // leading zero row/column.
    const int iw = W + 2 * r + 1;
    const int ih = bh + 2 * r + 1;
    std::vector<std::int64_t> integral(static_cast<std::size_t>(iw) * ih, 0);
    std::vector<std::int64_t> acc(static_cast<std::size_t>(W) * bh * 3, 0);
    std::vector<std::int64_t> wsum(static_cast<std::size_t>(W) * bh, 0);

    for (int dy = -S; dy <= S; ++dy) {
      for (int dx = -S; dx <= S; ++dx) {
        for (int iy = 1; iy < ih; ++iy) {
          const int y = y0 - r + iy - 1;
          const std::uint8_t* a = px(-r, y);
          const std::uint8_t* b = px(-r + dx, y + dy);
          std::int64_t* row = integral.data() + static_cast<std::size_t>(iy) * iw;
          const std::int64_t* above = row - iw;
          std::int64_t run = 0;
          for (int ix = 1; ix < iw; ++ix) {
            const int k = (ix - 1) * 3;
            const int d0 = a[k] - b[k];
            const int d1 = a[k + 1] - b[k + 1];
            const int d2 = a[k + 2] - b[k + 2];
            run += d0 * d0 + d1 * d1 + d2 * d2;
            row[ix] = above[ix] + run;
          }
        }
        for (int by = 0; by < bh; ++by) {
          // Patch centered at (x, y0 + by) spans integral rows by..by+2r+1.
          const std::int64_t* top = integral.data() + static_cast<std::size_t>(by) * iw;
          const std::int64_t* bot = top + static_cast<std::size_t>(patch_d) * iw;
          const std::uint8_t* q = px(dx, y0 + by + dy);
          std::int64_t* arow = acc.data() + static_cast<std::size_t>(by) * W * 3;
          std::int64_t* wrow = wsum.data() + static_cast<std::size_t>(by) * W;
          for (int x = 0; x < W; ++x) {
            const std::int64_t ssd =
                bot[x + patch_d] - bot[x] - top[x + patch_d] + top[x];
            const std::int64_t w = weights(ssd);
            if (w == 0) continue;
            wrow[x] += w;
            arow[x * 3] += w * q[x * 3];
            arow[x * 3 + 1] += w * q[x * 3 + 1];
            arow[x * 3 + 2] += w * q[x * 3 + 2];
          }
        }
      }
    }
    for (int by = 0; by < bh; ++by) {
      std::uint8_t* dst = out.row(y0 + by);
      const std::int64_t* arow = acc.data() + static_cast<std::size_t>(by) * W * 3;
      const std::int64_t* wrow = wsum.data() + static_cast<std::size_t>(by) * W;
      for (int x = 0; x < W; ++x) {
        const std::int64_t ws = wrow[x];  // > 0: the center always has weight 1
        for (int ch = 0; ch < 3; ++ch) {
          dst[x * 3 + ch] = static_cast<std::uint8_t>((arow[x * 3 + ch] + ws / 2) / ws);
        }
      }
    }
  };

  const int n_threads = std::clamp(threads, 1, n_bands);
  if (n_threads == 1) {
    for (int band = 0; band < n_bands; ++band) run_band(band);
    return out;
  }
  std::atomic<int> next{0};
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (int band = next++; band < n_bands; band = next++) run_band(band);
      });
    }
  }
  return out;
}

/// Noise standard deviation per channel, from the median absolute deviation
/// of the 4-neighbour Laplacian of the luminance. Assumes channel-independent
/// Gaussian noise; 0 for a constant image.
inline double estimate_noise_sigma(const ImageBuffer& img) {
  const int W = img.width();
  const int H = img.height();
  if (W < 3 || H < 3) throw PreconditionError("noise estimation needs >= 3x3");
  std::vector<double> luma(static_cast<std::size_t>(W) * H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const Rgb c = img.at(x, y);
      luma[static_cast<std::size_t>(y) * W + x] = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
    }
  }
  std::vector<double> lap;
  lap.reserve(static_cast<std::size_t>(W - 2) * (H - 2));
  for (int y = 1; y < H - 1; ++y) {
    for (int x = 1; x < W - 1; ++x) {
      const auto at = [&](int xx, int yy) { return luma[static_cast<std::size_t>(yy) * W + xx]; };
      lap.push_back(at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4 * at(x, y));
    }
  }
  auto median = [](std::vector<double>& v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = (m + *std::max_element(v.begin(), mid)) / 2;
    return m;
  };
  const double center = median(lap);
  for (double& v : lap) v = std::abs(v - center);
  const double mad = median(lap);
  // Gaussian MAD -> sigma; the Laplacian scales white noise by sqrt(20);
  // luminance mixing scales channel noise by the weight vector's norm.
  const double luma_gain = std::sqrt(0.299 * 0.299 + 0.587 * 0.587 + 0.114 * 0.114);
  return 1.482602218505602 * mad / std::sqrt(20.0) / luma_gain;
}

}  // namespace srdet

#endif  // SRDET_DENOISE_HPP_
