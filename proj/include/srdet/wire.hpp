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
#ifndef SRDET_WIRE_HPP_
#define SRDET_WIRE_HPP_

// Line protocol spoken with external detector and super-resolution services.
// Every message is one compact JSON object on a single UTF-8 line carrying
// "v": 1 and a "request_id".
//
//   detect request   {"image":<b64 png>,"max_detections":N,"min_score":S,
//                     "request_id":ID,"v":1}
//   detect response  {"detections":[{"box":[a,b,c,d],"class_id":K,
//                     "score":S},...],"request_id":ID,"v":1}
//   upscale request  {"image":<b64 png>,"request_id":ID,"v":1,"zoom":Z}
//   upscale response {"image":<b64 png>,"request_id":ID,"v":1}
//   any failure      {"error":<text>,"request_id":ID,"v":1}

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "srdet/base64.hpp"
#include "srdet/detection.hpp"
#include "srdet/detector.hpp"
#include "srdet/error.hpp"
#include "srdet/imagebuf.hpp"
#include "srdet/png.hpp"

namespace srdet::wire {

inline constexpr int kVersion = 1;

inline std::uint64_t next_request_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

namespace detail {

inline nlohmann::json parse_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message is not an object");
  if (!j.contains("v") || !j["v"].is_number_integer() ||
      j["v"].get<int>() != kVersion) {
    throw ProtocolError("missing or unsupported protocol version");
  }
  if (!j.contains("request_id") || !j["request_id"].is_number_unsigned()) {
    throw ProtocolError("missing request_id");
  }
  return j;
}

inline void check_response_header(const nlohmann::json& j,
                                  std::uint64_t expected_id) {
  const auto id = j["request_id"].get<std::uint64_t>();
  if (id != expected_id) {
    throw ProtocolError("request_id mismatch: expected " +
                        std::to_string(expected_id) + ", got " +
                        std::to_string(id));
  }
  if (j.contains("error")) {
    throw ProtocolError("backend reported error: " +
                        (j["error"].is_string() ? j["error"].get<std::string>()
                                                : j["error"].dump()));
  }
}

inline ImageBuffer image_field(const nlohmann::json& j) {
  if (!j.contains("image") || !j["image"].is_string()) {
    throw ProtocolError("missing image field");
  }
  try {
    return decode_png(base64::decode(j["image"].get<std::string>()),
                      "image field");
  } catch (const DecodeError& e) {
    throw ProtocolError(e.what());
  }
}

}  // namespace detail

struct DetectRequest {
  std::uint64_t request_id = 0;
  ImageBuffer image;
  DetectorConfig cfg;
};

struct UpscaleRequest {
  std::uint64_t request_id = 0;
  ImageBuffer image;
  int zoom = 2;
};

inline std::string encode_request(const ImageBuffer& img,
                                  const DetectorConfig& cfg,
                                  std::uint64_t request_id) {
  nlohmann::json j;
  j["v"] = kVersion;
  j["request_id"] = request_id;
  j["image"] = base64::encode(encode_png(img));
  j["max_detections"] = cfg.max_detections;
  j["min_score"] = cfg.min_score;
  return j.dump();
}

/// Draws a fresh, strictly increasing request id.
inline std::string encode_request(const ImageBuffer& img,
                                  const DetectorConfig& cfg) {
  return encode_request(img, cfg, next_request_id());
}

inline DetectRequest decode_request(std::string_view line) {
  const auto j = detail::parse_line(line);
  DetectRequest req;
  req.request_id = j["request_id"].get<std::uint64_t>();
  req.image = detail::image_field(j);
  if (!j.contains("max_detections") || !j["max_detections"].is_number_integer() ||
      !j.contains("min_score") || !j["min_score"].is_number()) {
    throw ProtocolError("missing max_detections or min_score");
  }
  req.cfg.max_detections = j["max_detections"].get<int>();
  req.cfg.min_score = j["min_score"].get<double>();
  try {
    req.cfg.check();
  } catch (const PreconditionError& e) {
    throw ProtocolError(e.what());
  }
  return req;
}

inline std::string encode_response(const std::vector<Detection>& dets,
                                   std::uint64_t request_id) {
  nlohmann::json list = nlohmann::json::array();
  for (const Detection& d : dets) {
    list.push_back({{"box", {d.a, d.b, d.c, d.d}},
                    {"class_id", d.class_id},
                    {"score", d.score}});
  }
  nlohmann::json j;
  j["v"] = kVersion;
  j["request_id"] = request_id;
  j["detections"] = std::move(list);
  return j.dump();
}

inline std::string encode_error(std::string_view message,
                                std::uint64_t request_id) {
  nlohmann::json j;
  j["v"] = kVersion;
  j["request_id"] = request_id;
  j["error"] = std::string(message);
  return j.dump();
}

/// Parses a detect response and checks it answers `expected_id`. Boxes with
/// inverted corners, out-of-range scores or bad classes are rejected.
inline DetectionSet decode_response(std::string_view line,
                                    std::uint64_t expected_id) {
  const auto j = detail::parse_line(line);
  detail::check_response_header(j, expected_id);
  if (!j.contains("detections") || !j["detections"].is_array()) {
    throw ProtocolError("missing detections list");
  }
  DetectionSet out;
  for (const auto& item : j["detections"]) {
    if (!item.is_object() || !item.contains("box") || !item["box"].is_array() ||
        item["box"].size() != 4 || !item.contains("class_id") ||
        !item["class_id"].is_number_integer() || !item.contains("score") ||
        !item["score"].is_number()) {
      throw ProtocolError("malformed detection entry: " + item.dump());
    }
    for (const auto& v : item["box"]) {
      if (!v.is_number()) throw ProtocolError("non-numeric box coordinate");
    }
    Detection d;
    d.a = item["box"][0].get<double>();
    d.b = item["box"][1].get<double>();
    d.c = item["box"][2].get<double>();
    d.d = item["box"][3].get<double>();
    d.class_id = item["class_id"].get<int>();
    d.score = item["score"].get<double>();
    if (auto why = validate(d); !why.empty()) {
      throw ProtocolError("invalid detection " + item.dump() + ": " + why);
    }
    out.items.push_back(d);
  }
  return out;
}

inline std::string encode_upscale_request(const ImageBuffer& img, int zoom,
                                          std::uint64_t request_id) {
  nlohmann::json j;
  j["v"] = kVersion;
  j["request_id"] = request_id;
  j["image"] = base64::encode(encode_png(img));
  j["zoom"] = zoom;
  return j.dump();
}

inline UpscaleRequest decode_upscale_request(std::string_view line) {
  const auto j = detail::parse_line(line);
  UpscaleRequest req;
  req.request_id = j["request_id"].get<std::uint64_t>();
  req.image = detail::image_field(j);
  if (!j.contains("zoom") || !j["zoom"].is_number_integer() ||
      j["zoom"].get<int>() < 2) {
    throw ProtocolError("missing or invalid zoom");
  }
  req.zoom = j["zoom"].get<int>();
  return req;
}

inline std::string encode_upscale_response(const ImageBuffer& img,
                                           std::uint64_t request_id) {
  nlohmann::json j;
  j["v"] = kVersion;
  j["request_id"] = request_id;
  j["image"] = base64::encode(encode_png(img));
  return j.dump();
}

/// Parses an upscale response; the image must be exactly zoom x the input.
inline ImageBuffer decode_upscale_response(std::string_view line,
                                           std::uint64_t expected_id,
                                           int in_w, int in_h, int zoom) {
  const auto j = detail::parse_line(line);
  detail::check_response_header(j, expected_id);
  ImageBuffer img = detail::image_field(j);
  if (img.width() != zoom * in_w || img.height() != zoom * in_h) {
    throw ProtocolError(
        "upscale response has dimensions " + std::to_string(img.width()) +
        "x" + std::to_string(img.height()) + ", expected " +
        std::to_string(zoom * in_w) + "x" + std::to_string(zoom * in_h));
  }
  return img;
}

}  // namespace srdet::wire

#endif  // SRDET_WIRE_HPP_
