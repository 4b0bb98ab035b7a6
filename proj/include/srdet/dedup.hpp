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
#ifndef SRDET_DEDUP_HPP_
#define SRDET_DEDUP_HPP_

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "srdet/detection.hpp"
#include "srdet/error.hpp"

namespace srdet {

struct MergePolicy {
  double theta = 0.1;
  bool class_aware = true;

  void check() const {
    if (!(theta > 0.0 && theta < 1.0)) {
      throw PreconditionError("IoU threshold theta must lie in (0,1)");
    }
  }
};

/// Axis-aligned box with corners (x0, y0) <= (x1, y1).
template <typename T>
struct BasicBox {
  T x0{};
  T y0{};
  T x1{};
  T y1{};
};

/// Reduced fraction num/den, den > 0.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  friend bool operator==(const Ratio&, const Ratio&) = default;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Intersection and union areas of two boxes. Exact for integer
/// coordinates, and for doubles whose products stay within 53 bits.
template <typename T>
std::pair<T, T> intersection_union(const BasicBox<T>& j, const BasicBox<T>& k) {
  const T iw = std::max(T{0}, std::min(j.x1, k.x1) - std::max(j.x0, k.x0));
  const T ih = std::max(T{0}, std::min(j.y1, k.y1) - std::max(j.y0, k.y0));
  const T inter = iw * ih;
  const T area_j = (j.x1 - j.x0) * (j.y1 - j.y0);
  const T area_k = (k.x1 - k.x0) * (k.y1 - k.y0);
  return {inter, area_j + area_k - inter};
}

/// IoU of integer boxes as an exact reduced fraction. Two zero-area boxes
/// have IoU 0.
template <std::integral T>
Ratio iou_exact(const BasicBox<T>& j, const BasicBox<T>& k) {
  const auto [inter, uni] = intersection_union(j, k);
  if (uni == 0 || inter == 0) return {0, 1};
  const auto g = std::gcd(static_cast<std::int64_t>(inter), static_cast<std::int64_t>(uni));
  return {static_cast<std::int64_t>(inter) / g, static_cast<std::int64_t>(uni) / g};
}

inline BasicBox<double> box_of(const Detection& d) { return {d.a, d.b, d.c, d.d}; }

/// Intersection over union in [0, 1]; 0 for disjoint boxes or an empty
/// union. The areas are computed exactly and divided once.
inline double iou(const Detection& j, const Detection& k) {
  const auto [inter, uni] = intersection_union(box_of(j), box_of(k));
  if (uni <= 0 || inter <= 0) return 0.0;
  return inter / uni;
}

/// Greedy global duplicate filtering. All candidates (base plus every window
/// set, already in LR frame coordinates) are ranked by ranks_before; a
/// candidate is kept iff its IoU with every kept detection of a comparable
/// class is <= theta. The result is ordered by ranks_before and does not
/// depend on the order of `windows`.
inline DetectionSet merge(const DetectionSet& base,
                          std::span<const DetectionSet> windows,
                          const MergePolicy& policy) {
  policy.check();
  std::vector<Detection> pool = base.items;
  for (const DetectionSet& w : windows) {
    pool.insert(pool.end(), w.items.begin(), w.items.end());
  }
  std::sort(pool.begin(), pool.end(), ranks_before);

  DetectionSet out;
  out.frame_id = base.frame_id;
  for (const Detection& cand : pool) {
    const bool duplicate = std::any_of(
        out.items.begin(), out.items.end(), [&](const Detection& kept) {
          if (policy.class_aware && kept.class_id != cand.class_id) return false;
          return iou(kept, cand) > policy.theta;
        });
    if (!duplicate) out.items.push_back(cand);
  }
  return out;
}

struct MatchCounts {
  std::size_t n_base = 0;
  std::size_t n_merged = 0;

  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

inline MatchCounts match_counts(const DetectionSet& base, const DetectionSet& merged) {
  return {base.size(), merged.size()};
}

}  // namespace srdet

#endif  // SRDET_DEDUP_HPP_
