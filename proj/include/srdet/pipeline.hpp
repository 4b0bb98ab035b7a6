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
#ifndef SRDET_PIPELINE_HPP_
#define SRDET_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "srdet/dedup.hpp"
#include "srdet/denoise.hpp"
#include "srdet/detector.hpp"
#include "srdet/geometry.hpp"
#include "srdet/imagebuf.hpp"
#include "srdet/png.hpp"
#include "srdet/superres.hpp"

namespace srdet {

inline int default_worker_count() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct PipelineConfig {
  DetectorConfig detector;
  int zoom = 2;
  UpscaleMethod method;
  bool denoise = true;
  NlmParams nlm;
  bool auto_sigma = false;  // estimate the NLM sigma from the upscaled frame
  MergePolicy merge;
  int parallel_windows = default_worker_count();  // also used for NLM rows
  bool record_timings = false;

  void check() const {
    detector.check();
    if (zoom < 2) throw PreconditionError("zoom must be an integer >= 2");
    method.check();
    nlm.check();
    merge.check();
    if (parallel_windows < 1) throw PreconditionError("parallel_windows must be >= 1");
  }
};

struct StageTimings {
  double detect_ms = 0;
  double sr_ms = 0;
  double nlm_ms = 0;
  double windows_ms = 0;
  double merge_ms = 0;
};

struct WindowResult {
  WindowPlacement placement;
  DetectionSet detections;  // LR frame coordinates
};

struct FrameResult {
  DetectionSet base;
  std::vector<WindowResult> per_window;
  DetectionSet merged;
  StageTimings timings;
};

/// A frame aborted by a backend or stage failure; carries the timings
/// gathered before the failure.
class FrameError : public Error {
 public:
  FrameError(const std::string& what, StageTimings partial)
      : Error(what), timings(partial) {}
  StageTimings timings;
};

namespace detail {

class StageClock {
 public:
  StageClock() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Runs task(i) for i in [0, n) on up to `workers` threads. The first
// exception is rethrown after all workers stop.
template <typename Task>
void parallel_for(int n, int workers, Task&& task) {
  workers = std::clamp(workers, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < n && !failed; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

inline Detection clip_to_frame(Detection d, int w, int h) {
  d.a = std::clamp(d.a, 0.0, static_cast<double>(w));
  d.c = std::clamp(d.c, 0.0, static_cast<double>(w));
  d.b = std::clamp(d.b, 0.0, static_cast<double>(h));
  d.d = std::clamp(d.d, 0.0, static_cast<double>(h));
  return d;
}

}  // namespace detail

/// Window placement for one first-pass detection: its center is taken to
/// the center-origin convention, scaled by Z, and brought back to top-left
/// HR coordinates before placing an LR-sized crop there.
inline WindowPlacement window_for(const Detection& det, int lr_w, int lr_h, int zoom) {
  const Point center_lr = topleft_to_center(detection_center(det), lr_w, lr_h);
  const Point center_hr = center_to_topleft(lr_to_hr(center_lr, zoom), zoom * lr_w, zoom * lr_h);
  return place_window(center_hr, lr_w, lr_h, zoom * lr_w, zoom * lr_h, zoom);
}

/// One frame through all six steps: first pass, super-resolution, denoise,
/// one window per first-pass detection, second pass on every window, and
/// back-translation plus duplicate merge. No first-pass detections means no
/// super-resolution work at all.
inline FrameResult enhance_frame(const ImageBuffer& img, const PipelineConfig& cfg,
                                 BackendPool& backends, const std::string& frame_id = {}) {
  cfg.check();
  if (img.empty()) throw PreconditionError("enhance_frame called on an empty image");
  FrameResult result;
  StageTimings& t = result.timings;
  const int lr_w = img.width();
  const int lr_h = img.height();

  try {
    {
      detail::StageClock clock;
      auto lease = backends.acquire();
      result.base = detect(*lease, img, cfg.detector, {frame_id, CoordinateFrame::identity()});
      result.base.frame_id = frame_id;
      t.detect_ms = clock.ms();
    }
    result.merged.frame_id = frame_id;
    if (result.base.empty()) return result;

    ImageBuffer hr;
    {
      detail::StageClock clock;
      hr = upscale(img, cfg.zoom, cfg.method);
      t.sr_ms = clock.ms();
    }
    if (cfg.denoise) {
      detail::StageClock clock;
      NlmParams p = cfg.nlm;
      if (cfg.auto_sigma) p.sigma = estimate_noise_sigma(hr);
      hr = nlm_denoise(hr, p, cfg.parallel_windows);
      t.nlm_ms = clock.ms();
    }

    {
      detail::StageClock clock;
      const int n = static_cast<int>(result.base.size());
      result.per_window.resize(static_cast<std::size_t>(n));
      detail::parallel_for(n, cfg.parallel_windows, [&](int i) {
        WindowResult& wr = result.per_window[static_cast<std::size_t>(i)];
        wr.placement = window_for(result.base.items[static_cast<std::size_t>(i)], lr_w, lr_h, cfg.zoom);
        const IntRect& r = wr.placement.hr_rect;
        const ImageBuffer window = crop(hr, r.left, r.top, r.w, r.h);
        auto lease = backends.acquire();
        DetectionSet local = detect(*lease, window, cfg.detector, {frame_id, wr.placement.frame});
        wr.detections.frame_id = frame_id;
        wr.detections.items.reserve(local.size());
        for (const Detection& d : local.items) {
          wr.detections.items.push_back(
              detail::clip_to_frame(window_to_frame(d, wr.placement.frame), lr_w, lr_h));
        }
      });
      t.windows_ms = clock.ms();
    }

    {
      detail::StageClock clock;
      std::vector<DetectionSet> sets;
      sets.reserve(result.per_window.size());
      for (const WindowResult& wr : result.per_window) sets.push_back(wr.detections);
      result.merged = merge(result.base, sets, cfg.merge);
      result.merged.frame_id = frame_id;
      t.merge_ms = clock.ms();
    }
  } catch (const FrameError&) {
    throw;
  } catch (const Error& e) {
    throw FrameError("frame '" + frame_id + "': " + e.what(), t);
  }
  return result;
}

struct FrameOutcome {
  std::string frame_id;
  std::optional<FrameResult> result;
  std::string error;  // set iff !result
};

struct SequenceResult {
  std::vector<FrameOutcome> frames;
  std::string csv;
};

inline constexpr const char* kSummaryHeader =
    "frame_id,n_base,n_merged,t_detect_ms,t_sr_ms,t_nlm_ms,t_windows_ms,t_merge_ms";

/// One-line description of the settings that shape the results, written as
/// the comment line at the top of the summary CSV.
inline std::string describe(const PipelineConfig& cfg) {
  char sigma[32] = "auto";
  if (!cfg.auto_sigma) std::snprintf(sigma, sizeof sigma, "%g", cfg.nlm.sigma);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# zoom=%d upscale=%s denoise=%s nlm_h=%g nlm_patch_radius=%d "
                "nlm_search_radius=%d nlm_sigma=%s max_detections=%d min_score=%g "
                "iou_threshold=%g class_aware=%s",
                cfg.zoom, to_string(cfg.method.kind), cfg.denoise ? "on" : "off", cfg.nlm.h,
                cfg.nlm.patch_radius, cfg.nlm.search_radius,
                sigma,
                cfg.detector.max_detections, cfg.detector.min_score, cfg.merge.theta,
                cfg.merge.class_aware ? "true" : "false");
  return buf;
}

inline std::string summary_row(const FrameOutcome& f, bool with_timings) {
  std::ostringstream row;
  row << f.frame_id << ',';
  const StageTimings* t = nullptr;
  if (f.result) {
    row << f.result->base.size() << ',' << f.result->merged.size();
    t = &f.result->timings;
  } else {
    row << "ERROR,ERROR";
  }
  for (double ms : t ? std::vector<double>{t->detect_ms, t->sr_ms, t->nlm_ms, t->windows_ms,
                                           t->merge_ms}
                     : std::vector<double>(5, 0.0)) {
    row << ',';
    if (with_timings && t) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", ms);
      row << buf;
    }
  }
  return row.str();
}

/// Runs every frame in order. A frame that fails becomes an error row and
/// the sequence continues. Frame ids are the file stems.
inline SequenceResult enhance_sequence(const std::vector<std::filesystem::path>& frames,
                                       const PipelineConfig& cfg, BackendPool& backends) {
  cfg.check();
  SequenceResult out;
  std::string csv = describe(cfg) + "\n" + kSummaryHeader + "\n";
  for (const auto& path : frames) {
    FrameOutcome f;
    f.frame_id = path.stem().string();
    try {
      f.result = enhance_frame(load_png(path), cfg, backends, f.frame_id);
    } catch (const Error& e) {
      f.error = e.what();
    }
    csv += summary_row(f, cfg.record_timings) + "\n";
    out.frames.push_back(std::move(f));
  }
  out.csv = std::move(csv);
  return out;
}

}  // namespace srdet

#endif  // SRDET_PIPELINE_HPP_
