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
#ifndef SRDET_DETECTOR_HPP_
#define SRDET_DETECTOR_HPP_

#include <algorithm>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "srdet/detection.hpp"
#include "srdet/error.hpp"
#include "srdet/geometry.hpp"
#include "srdet/imagebuf.hpp"

namespace srdet {

struct DetectorConfig {
  int max_detections = 100;
  double min_score = 0.3;

  void check() const {
    if (max_detections < 1) {
      throw PreconditionError("max_detections must be >= 1");
    }
    if (!(min_score >= 0.0 && min_score <= 1.0)) {
      throw PreconditionError("min_score must lie in [0,1]");
    }
  }
};

/// What the pipeline knows about the image handed to a backend. Real
/// detectors ignore it; the synthetic oracle needs it to locate the window.
struct FrameContext {
  std::string frame_id;
  CoordinateFrame frame = CoordinateFrame::identity();
};

/// The detector F: image in, detections out (top-left pixel coordinates of
/// the image). One instance serves one request at a time.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::vector<Detection> infer(const ImageBuffer& img,
                                       const DetectorConfig& cfg,
                                       const FrameContext& ctx) = 0;
};

using BackendFactory = std::function<std::unique_ptr<DetectorBackend>()>;

/// Keeps score >= min_score, orders by ranks_before and truncates to
/// max_detections. Idempotent.
inline std::vector<Detection> post_filter(std::vector<Detection> dets,
                                          const DetectorConfig& cfg) {
  std::erase_if(dets, [&](const Detection& d) { return d.score < cfg.min_score; });
  std::sort(dets.begin(), dets.end(), ranks_before);
  if (dets.size() > static_cast<std::size_t>(cfg.max_detections)) {
    dets.resize(static_cast<std::size_t>(cfg.max_detections));
  }
  return dets;
}

inline DetectionSet detect(DetectorBackend& backend, const ImageBuffer& img,
                           const DetectorConfig& cfg,
                           const FrameContext& ctx = {}) {
  if (img.empty()) throw PreconditionError("detect called on an empty image");
  std::vector<Detection> raw;
  try {
    raw = backend.infer(img, cfg, ctx);
  } catch (const DetectionError&) {
    throw;
  } catch (const Error& e) {
    throw DetectionError(std::string("detector backend failed: ") + e.what());
  }
  for (const Detection& d : raw) {
    if (auto why = validate(d); !why.empty()) {
      throw DetectionError("detector backend returned an invalid detection: " +
                           why);
    }
  }
  return {post_filter(std::move(raw), cfg), ctx.frame_id};
}

/// A fixed set of lazily created backends. Each lease gives exclusive use of
/// one backend, so no connection ever sees interleaved requests.
class BackendPool {
 public:
  BackendPool(BackendFactory factory, int capacity)
      : factory_(std::move(factory)), capacity_(std::max(capacity, 1)) {}

  class Lease {
   public:
    Lease(BackendPool* pool, std::unique_ptr<DetectorBackend> b)
        : pool_(pool), backend_(std::move(b)) {}
    Lease(Lease&&) = default;
    Lease& operator=(Lease&&) = delete;
    ~Lease() {
      if (backend_) pool_->release(std::move(backend_));
    }
    DetectorBackend& operator*() { return *backend_; }
    DetectorBackend* operator->() { return backend_.get(); }

   private:
    BackendPool* pool_;
    std::unique_ptr<DetectorBackend> backend_;
  };

  Lease acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !idle_.empty() || created_ < capacity_; });
    if (!idle_.empty()) {
      auto b = std::move(idle_.back());
      idle_.pop_back();
      return Lease(this, std::move(b));
    }
    ++created_;
    lock.unlock();
    try {
      return Lease(this, factory_());
    } catch (...) {
      std::lock_guard relock(mu_);
      --created_;
      cv_.notify_one();
      throw;
    }
  }

  int capacity() const { return capacity_; }

 private:
  void release(std::unique_ptr<DetectorBackend> b) {
    std::lock_guard lock(mu_);
    idle_.push_back(std::move(b));
    cv_.notify_one();
  }

  BackendFactory factory_;
  int capacity_;
  int created_ = 0;
  std::vector<std::unique_ptr<DetectorBackend>> idle_;
  std::mutex mu_;
  std::condition_variable cv_;
};

}  // namespace srdet

#endif  // SRDET_DETECTOR_HPP_
