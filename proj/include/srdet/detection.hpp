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
#ifndef SRDET_DETECTION_HPP_
#define SRDET_DETECTION_HPP_

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "srdet/error.hpp"

namespace srdet {

/// One detected object. (a, b) is the top-left corner and (c, d) the
/// bottom-right corner, in top-left-origin pixel coordinates of whatever
/// image produced it.
struct Detection {
  double a = 0;
  double b = 0;
  double c = 0;
  double d = 0;
  int class_id = 1;  // COCO numbering
  double score = 0;

  double width() const { return c - a; }
  double height() const { return d - b; }
  double area() const { return width() * height(); }

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Strict weak order used everywhere a deterministic ranking is needed:
/// score descending, then corners ascending, then class ascending.
inline bool ranks_before(const Detection& x, const Detection& y) {
  if (x.score != y.score) return x.score > y.score;
  return std::tie(x.a, x.b, x.c, x.d, x.class_id) <
         std::tie(y.a, y.b, y.c, y.d, y.class_id);
}

/// Returns an empty string when `det` is valid, otherwise a diagnostic.
inline std::string validate(const Detection& det) {
  for (double v : {det.a, det.b, det.c, det.d, det.score}) {
    if (!std::isfinite(v)) return "non-finite value in detection";
  }
  if (det.a > det.c || det.b > det.d) return "inverted box corners";
  if (det.score < 0.0 || det.score > 1.0) return "score outside [0,1]";
  if (det.class_id < 1) return "class_id must be >= 1";
  return {};
}

struct DetectionSet {
  std::vector<Detection> items;
  std::string frame_id;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }

  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

}  // namespace srdet

#endif  // SRDET_DETECTION_HPP_
