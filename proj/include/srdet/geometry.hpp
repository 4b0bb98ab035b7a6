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
#ifndef SRDET_GEOMETRY_HPP_
#define SRDET_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <string>

#include "srdet/detection.hpp"
#include "srdet/error.hpp"

// Coordinate conventions.
//
// Files, the wire protocol and every Detection use top-left-origin pixel
// coordinates. The center-origin convention (origin at the image center)
// only appears in center_to_topleft / topleft_to_center; nothing else in the
// library uses it.
//
// A CoordinateFrame maps pixel coordinates of a window image into frame
// coordinates of the low-resolution input: p_frame = offset + p_window/scale.

namespace srdet {

struct Point {
  double x = 0;
  double y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct CoordinateFrame {
  Point offset;       // window top-left, in LR frame pixels
  double scale = 1;   // zoom factor Z; 1 for the identity frame

  static CoordinateFrame identity() { return {}; }
  bool is_identity() const {
    return scale == 1 && offset.x == 0 && offset.y == 0;
  }

  friend bool operator==(const CoordinateFrame&,
                         const CoordinateFrame&) = default;
};

struct IntRect {
  int left = 0;
  int top = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const IntRect&, const IntRect&) = default;
};

struct WindowPlacement {
  IntRect hr_rect;
  CoordinateFrame frame;
  // The requested HR center expressed in window pixels. Equal to the window's
  // geometric center up to integer rounding unless the window was shifted to
  // stay inside the HR image.
  Point anchor;
};

inline Point detection_center(const Detection& det) {
  return {(det.a + det.c) / 2.0, (det.b + det.d) / 2.0};
}

inline Point lr_to_hr(Point p, double zoom) {
  return {zoom * p.x, zoom * p.y};
}

inline Point center_to_topleft(Point p, int w, int h) {
  return {p.x + w / 2.0, p.y + h / 2.0};
}

inline Point topleft_to_center(Point p, int w, int h) {
  return {p.x - w / 2.0, p.y - h / 2.0};
}

/// Chooses the lr_w x lr_h crop of the HR image whose center is closest to
/// `center_hr` (top-left convention, HR pixels). Windows that would cross the
/// HR border are shifted inward, never shrunk.
inline WindowPlacement place_window(Point center_hr, int lr_w, int lr_h,
                                    int hr_w, int hr_h, int zoom) {
  if (zoom < 2) throw PreconditionError("zoom must be an integer >= 2");
  if (lr_w < 1 || lr_h < 1) {
    throw PreconditionError("window dimensions must be >= 1");
  }
  if (lr_w > hr_w || lr_h > hr_h) {
    throw PreconditionError("window " + std::to_string(lr_w) + "x" +
                            std::to_string(lr_h) +
                            " does not fit HR image " + std::to_string(hr_w) +
                            "x" + std::to_string(hr_h));
  }
  if (hr_w != zoom * lr_w || hr_h != zoom * lr_h) {
    throw PreconditionError("HR dimensions must equal zoom * LR dimensions");
  }
  if (!std::isfinite(center_hr.x) || !std::isfinite(center_hr.y)) {
    throw PreconditionError("window center must be finite");
  }
  // Clamp in double first so far-away centers cannot overflow int.
  const double ideal_left = std::clamp(
      std::floor(center_hr.x - lr_w / 2.0 + 0.5), 0.0,
      static_cast<double>(hr_w - lr_w));
  const double ideal_top = std::clamp(
      std::floor(center_hr.y - lr_h / 2.0 + 0.5), 0.0,
      static_cast<double>(hr_h - lr_h));
  WindowPlacement out;
  out.hr_rect = {static_cast<int>(ideal_left), static_cast<int>(ideal_top),
                 lr_w, lr_h};
  out.frame.scale = zoom;
  out.frame.offset = {out.hr_rect.left / static_cast<double>(zoom),
                      out.hr_rect.top / static_cast<double>(zoom)};
  out.anchor = {center_hr.x - out.hr_rect.left,
                center_hr.y - out.hr_rect.top};
  return out;
}

inline Point window_to_frame(Point p_window, const CoordinateFrame& frame) {
  return {frame.offset.x + p_window.x / frame.scale,
          frame.offset.y + p_window.y / frame.scale};
}

/// Inverse of window_to_frame.
inline Point frame_to_window(Point p_frame, const CoordinateFrame& frame) {
  return {(p_frame.x - frame.offset.x) * frame.scale,
          (p_frame.y - frame.offset.y) * frame.scale};
}

/// Maps both corners of a window-local detection into frame coordinates.
inline Detection window_to_frame(const Detection& det,
                                 const CoordinateFrame& frame) {
  const Point tl = window_to_frame(Point{det.a, det.b}, frame);
  const Point br = window_to_frame(Point{det.c, det.d}, frame);
  Detection out = det;
  out.a = tl.x;
  out.b = tl.y;
  out.c = br.x;
  out.d = br.y;
  return out;
}

}  // namespace srdet

#endif  // SRDET_GEOMETRY_HPP_
