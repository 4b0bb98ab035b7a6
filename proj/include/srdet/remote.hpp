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
#ifndef SRDET_REMOTE_HPP_
#define SRDET_REMOTE_HPP_

#include <memory>
#include <string>

#include "srdet/detector.hpp"
#include "srdet/transport.hpp"
#include "srdet/wire.hpp"

namespace srdet {

inline constexpr int kDefaultBackendTimeoutMs = 60000;

/// Detector backend talking the line protocol over one channel.
class RemoteDetector : public DetectorBackend {
 public:
  explicit RemoteDetector(std::unique_ptr<LineChannel> channel)
      : channel_(std::move(channel)) {}

  std::vector<Detection> infer(const ImageBuffer& img,
                               const DetectorConfig& cfg,
                               const FrameContext&) override {
    const std::uint64_t id = wire::next_request_id();
    try {
      channel_->send_line(wire::encode_request(img, cfg, id));
      return wire::decode_response(channel_->recv_line(), id).items;
    } catch (const Error& e) {
      throw DetectionError(std::string("remote detector: ") + e.what());
    }
  }

 private:
  std::unique_ptr<LineChannel> channel_;
};

inline BackendFactory remote_detector_factory(
    std::string uri, int timeout_ms = kDefaultBackendTimeoutMs) {
  return [uri = std::move(uri), timeout_ms] {
    return std::make_unique<RemoteDetector>(open_channel(uri, timeout_ms));
  };
}

}  // namespace srdet

#endif  // SRDET_REMOTE_HPP_
