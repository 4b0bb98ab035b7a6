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
#ifndef SRDET_EVALMAP_HPP_
#define SRDET_EVALMAP_HPP_

// COCO-protocol bounding-box mAP. Conventions follow pycocotools:
//   - 101 recall sample points 0.00, 0.01, ..., 1.00;
//   - precision made non-increasing from the right before sampling;
//   - area ranges [0, 1e10], [0, 32^2], [32^2, 96^2], both ends inclusive;
//   - ground truth outside the area range is ignored, detections matched to
//     it are ignored, unmatched detections outside the range are ignored;
//   - at most max_dets detections per image and category;
//   - a (category, area) cell without non-ignored ground truth is absent and
//     does not enter the mean.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "srdet/dedup.hpp"
#include "srdet/detection.hpp"
#include "srdet/error.hpp"

namespace srdet {

struct GtImage {
  int id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;
};

struct GtAnnotation {
  int id = 0;
  int image_id = 0;
  double x = 0;  // [x, y, w, h], top-left + size
  double y = 0;
  double w = 0;
  double h = 0;
  int category_id = 0;
  double area = 0;

  Detection as_box() const { return {x, y, x + w, y + h, category_id, 1.0}; }
};

struct GroundTruth {
  std::vector<GtImage> images;
  std::vector<GtAnnotation> annotations;

  const GtImage* find_image(int id) const {
    for (const GtImage& img : images) {
      if (img.id == id) return &img;
    }
    return nullptr;
  }
  const GtImage* find_image(const std::string& file_name) const {
    for (const GtImage& img : images) {
      if (img.file_name == file_name) return &img;
    }
    return nullptr;
  }
};

/// Predictions keyed by ground-truth image id.
using PredictionMap = std::map<int, DetectionSet>;

enum class AreaBucket { kAll, kSmall, kMedium };

struct AreaRange {
  double lo;
  double hi;
};

inline AreaRange range_of(AreaBucket b) {
  switch (b) {
    case AreaBucket::kAll:
      return {0, 1e10};
    case AreaBucket::kSmall:
      return {0, 32.0 * 32.0};
    case AreaBucket::kMedium:
      return {32.0 * 32.0, 96.0 * 96.0};
  }
  return {0, 1e10};
}

inline std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

struct EvalSpec {
  std::vector<double> iou_thresholds = coco_iou_thresholds();
  std::optional<std::vector<int>> class_filter;
  int max_dets = 100;

  void check() const {
    if (iou_thresholds.empty()) throw EvalError("no IoU thresholds");
    for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
      const double t = iou_thresholds[i];
      if (!(t > 0 && t <= 1)) throw EvalError("IoU thresholds must lie in (0,1]");
      if (i > 0 && !(t > iou_thresholds[i - 1])) {
        throw EvalError("IoU thresholds must be strictly increasing");
      }
    }
    if (max_dets < 1) throw EvalError("max_dets must be >= 1");
  }

  friend bool operator==(const EvalSpec&, const EvalSpec&) = default;
};

struct FrameCount {
  int image_id = 0;
  std::string file_name;
  std::size_t detections = 0;
};

struct EvalReport {
  std::optional<double> map_all_5095;
  std::optional<double> map_all_50;
  std::optional<double> map_all_75;
  std::optional<double> map_small_5095;
  std::optional<double> map_medium_50;
  std::vector<FrameCount> per_frame_counts;
  EvalSpec spec;
};

inline constexpr const char* kMetricNames[5] = {"map_all_5095", "map_all_50", "map_all_75",
                                                "map_small_5095", "map_medium_50"};

inline std::array<std::optional<double>, 5> columns(const EvalReport& r) {
  return {r.map_all_5095, r.map_all_50, r.map_all_75, r.map_small_5095, r.map_medium_50};
}

// ---------------------------------------------------------------------------
// Matching and AP

struct MatchResult {
  std::size_t pred = 0;          // index into the prediction list
  std::optional<std::size_t> gt;  // matched ground truth, if any
  bool ignored = false;           // excluded from TP/FP counting
};

namespace detail {

// Greedy COCO matching on one (image, category) cell. `dts` must be in rank
// order. Ground truth flagged in `gt_ignore` may only be matched when no
// regular ground truth qualifies. Equal IoUs resolve to the later ground
// truth, as in pycocotools.
inline std::vector<MatchResult> match_cell(const std::vector<Detection>& gts,
                                           const std::vector<bool>& gt_ignore,
                                           const std::vector<Detection>& dts, double iou_t,
                                           AreaRange dt_range) {
  // Regular ground truth first, preserving relative order.
  std::vector<std::size_t> order(gts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return !gt_ignore[l] && gt_ignore[r];
  });

  std::vector<bool> taken(gts.size(), false);
  std::vector<MatchResult> out;
  out.reserve(dts.size());
  for (std::size_t di = 0; di < dts.size(); ++di) {
    double best = std::min(iou_t, 1 - 1e-10);
    std::optional<std::size_t> m;
    for (std::size_t gi : order) {
      if (taken[gi]) continue;
      // Once a regular match exists, stop before the ignored tail.
      if (m && !gt_ignore[*m] && gt_ignore[gi]) break;
      const double v = iou(dts[di], gts[gi]);
      if (v < best) continue;
      best = v;
      m = gi;
    }
    MatchResult r{di, m, false};
    if (m) {
      taken[*m] = true;
      r.ignored = gt_ignore[*m];
    } else {
      const double a = dts[di].area();
      r.ignored = a < dt_range.lo || a > dt_range.hi;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace detail

/// Greedy matching of ranked predictions against the ground truth of one
/// image and class: each prediction takes the unmatched ground truth with
/// the highest IoU >= iou_t.
inline std::vector<MatchResult> match_detections(const std::vector<Detection>& gt,
                                                 const std::vector<Detection>& preds,
                                                 double iou_t) {
  return detail::match_cell(gt, std::vector<bool>(gt.size(), false), preds, iou_t,
                            range_of(AreaBucket::kAll));
}

/// 101-point interpolated AP from ranked TP (true) / FP (false) flags.
/// Absent when there is no ground truth.
inline std::optional<double> average_precision(const std::vector<bool>& ranked_tp,
                                               std::size_t n_gt) {
  if (n_gt == 0) return std::nullopt;
  const std::size_t n = ranked_tp.size();
  std::vector<double> recall(n);
  std::vector<double> precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked_tp[i]) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

// ---------------------------------------------------------------------------
// Dataset-level evaluation

namespace detail {

// AP of one (category, area bucket, threshold) over all images.
inline std::optional<double> evaluate_cell(const GroundTruth& gt, const PredictionMap& preds,
                                           int category, AreaBucket bucket, double iou_t,
                                           int max_dets) {
  const AreaRange range = range_of(bucket);
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> pooled;
  std::size_t n_regular_gt = 0;
  std::vector<int> image_ids;
  for (const GtImage& image : gt.images) image_ids.push_back(image.id);
  std::sort(image_ids.begin(), image_ids.end());
  for (const int image_id : image_ids) {
    const GtImage image{image_id, 0, 0, {}};
    std::vector<Detection> gts;
    std::vector<bool> ignore;
    for (const GtAnnotation& a : gt.annotations) {
      if (a.image_id != image.id || a.category_id != category) continue;
      gts.push_back(a.as_box());
      const bool ig = a.area < range.lo || a.area > range.hi;
      ignore.push_back(ig);
      if (!ig) ++n_regular_gt;
    }
    std::vector<Detection> dts;
    if (auto it = preds.find(image.id); it != preds.end()) {
      for (const Detection& d : it->second.items) {
        if (d.class_id == category) dts.push_back(d);
      }
    }
    std::stable_sort(dts.begin(), dts.end(), ranks_before);
    if (dts.size() > static_cast<std::size_t>(max_dets)) dts.resize(static_cast<std::size_t>(max_dets));
    for (const MatchResult& m : match_cell(gts, ignore, dts, iou_t, range)) {
      if (!m.ignored) pooled.push_back({dts[m.pred].score, m.gt.has_value()});
    }
  }
  // Stable: ties keep image order, then in-image rank.
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Scored& l, const Scored& r) { return l.score > r.score; });
  std::vector<bool> flags;
  flags.reserve(pooled.size());
  for (const Scored& s : pooled) flags.push_back(s.tp);
  return average_precision(flags, n_regular_gt);
}

inline std::optional<double> mean_present(const std::vector<std::optional<double>>& v) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace detail

/// AP for one area bucket at the given thresholds, averaged over the
/// categories present and then over thresholds (pycocotools' mean over the
/// valid precision entries reduces to this).
inline std::optional<double> mean_ap(const GroundTruth& gt, const PredictionMap& preds,
                                     const std::vector<int>& categories, AreaBucket bucket,
                                     const std::vector<double>& thresholds, int max_dets) {
  std::vector<std::optional<double>> per_class;
  for (int k : categories) {
    std::vector<std::optional<double>> per_t;
    for (double t : thresholds) {
      per_t.push_back(detail::evaluate_cell(gt, preds, k, bucket, t, max_dets));
    }
    per_class.push_back(detail::mean_present(per_t));
  }
  return detail::mean_present(per_class);
}

inline std::vector<int> evaluated_categories(const GroundTruth& gt, const EvalSpec& spec) {
  if (spec.class_filter) {
    std::set<int> s(spec.class_filter->begin(), spec.class_filter->end());
    return {s.begin(), s.end()};
  }
  std::set<int> s;
  for (const GtAnnotation& a : gt.annotations) s.insert(a.category_id);
  return {s.begin(), s.end()};
}

inline EvalReport evaluate(const GroundTruth& gt, const PredictionMap& preds,
                           const EvalSpec& spec = {}) {
  spec.check();
  for (const auto& [image_id, set] : preds) {
    if (!gt.find_image(image_id)) {
      throw EvalError("predictions reference unknown image_id " + std::to_string(image_id));
    }
  }
  const std::vector<int> cats = evaluated_categories(gt, spec);
  EvalReport r;
  r.spec = spec;
  r.map_all_5095 = mean_ap(gt, preds, cats, AreaBucket::kAll, spec.iou_thresholds, spec.max_dets);
  r.map_all_50 = mean_ap(gt, preds, cats, AreaBucket::kAll, {0.5}, spec.max_dets);
  r.map_all_75 = mean_ap(gt, preds, cats, AreaBucket::kAll, {0.75}, spec.max_dets);
  r.map_small_5095 =
      mean_ap(gt, preds, cats, AreaBucket::kSmall, spec.iou_thresholds, spec.max_dets);
  r.map_medium_50 = mean_ap(gt, preds, cats, AreaBucket::kMedium, {0.5}, spec.max_dets);

  std::vector<GtImage> images = gt.images;
  std::sort(images.begin(), images.end(),
            [](const GtImage& l, const GtImage& r) { return l.id < r.id; });
  for (const GtImage& image : images) {
    FrameCount fc{image.id, image.file_name, 0};
    if (auto it = preds.find(image.id); it != preds.end()) {
      for (const Detection& d : it->second.items) {
        if (!spec.class_filter || std::find(spec.class_filter->begin(), spec.class_filter->end(),
                                            d.class_id) != spec.class_filter->end()) {
          ++fc.detections;
        }
      }
    }
    r.per_frame_counts.push_back(fc);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Base vs enhanced comparison

struct ComparisonRow {
  std::string metric;
  std::optional<double> base;
  std::optional<double> enhanced;
  bool enhanced_better = false;

  double delta() const { return base && enhanced ? *enhanced - *base : 0.0; }
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<FrameCount> base_counts;
  std::vector<FrameCount> enhanced_counts;
};

inline std::string format_metric(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

inline Comparison compare_reports(const EvalReport& base, const EvalReport& enhanced) {
  if (!(base.spec == enhanced.spec)) throw EvalError("reports were produced with different specs");
  Comparison c;
  const auto b = columns(base);
  const auto e = columns(enhanced);
  for (std::size_t i = 0; i < b.size(); ++i) {
    ComparisonRow row{kMetricNames[i], b[i], e[i], false};
    row.enhanced_better = b[i] && e[i] && *e[i] > *b[i];
    c.rows.push_back(row);
  }
  c.base_counts = base.per_frame_counts;
  c.enhanced_counts = enhanced.per_frame_counts;
  return c;
}

/// `metric,base,enhanced`; the enhanced value is wrapped in ** when it beats
/// the base value.
inline std::string comparison_csv(const Comparison& c) {
  std::string out = "metric,base,enhanced\n";
  for (const ComparisonRow& r : c.rows) {
    std::string enh = format_metric(r.enhanced);
    if (r.enhanced_better) enh = "**" + enh + "**";
    out += r.metric + "," + format_metric(r.base) + "," + enh + "\n";
  }
  return out;
}

/// Per-frame detection counts for plotting, `frame,n_base,n_enhanced`.
inline std::string count_series_csv(const Comparison& c) {
  std::string out = "frame,n_base,n_enhanced\n";
  for (std::size_t i = 0; i < c.base_counts.size(); ++i) {
    const std::size_t enh = i < c.enhanced_counts.size() ? c.enhanced_counts[i].detections : 0;
    out += c.base_counts[i].file_name + "," + std::to_string(c.base_counts[i].detections) + "," +
           std::to_string(enh) + "\n";
  }
  return out;
}

inline std::string comparison_table(const Comparison& c) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s\n", "metric", "base", "enhanced", "delta");
  os << line;
  for (const ComparisonRow& r : c.rows) {
    char delta[32] = "NA";
    if (r.base && r.enhanced) std::snprintf(delta, sizeof delta, "%+.4f", r.delta());
    std::snprintf(line, sizeof line, "%-16s %10s %9s%s %10s\n", r.metric.c_str(),
                  format_metric(r.base).c_str(), format_metric(r.enhanced).c_str(),
                  r.enhanced_better ? "*" : " ", delta);
    os << line;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// File formats

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth gt;
  try {
    std::set<int> image_ids;
    for (const auto& im : j.at("images")) {
      GtImage g{im.at("id").get<int>(), im.at("width").get<int>(), im.at("height").get<int>(),
                im.value("file_name", std::string{})};
      if (!image_ids.insert(g.id).second) {
        throw EvalError("duplicate image id " + std::to_string(g.id));
      }
      gt.images.push_back(std::move(g));
    }
    std::set<int> ann_ids;
    for (const auto& a : j.at("annotations")) {
      const auto bbox = a.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) throw EvalError("bbox must have 4 entries");
      GtAnnotation g;
      g.id = a.at("id").get<int>();
      g.image_id = a.at("image_id").get<int>();
      g.x = bbox[0];
      g.y = bbox[1];
      g.w = bbox[2];
      g.h = bbox[3];
      g.category_id = a.at("category_id").get<int>();
      g.area = a.contains("area") ? a["area"].get<double>() : g.w * g.h;
      if (!ann_ids.insert(g.id).second) {
        throw EvalError("duplicate annotation id " + std::to_string(g.id));
      }
      const GtImage* img = gt.find_image(g.image_id);
      if (!img) throw EvalError("annotation " + std::to_string(g.id) + " has unknown image_id");
      if (g.w < 0 || g.h < 0 || g.x < 0 || g.y < 0 || g.x + g.w > img->width ||
          g.y + g.h > img->height) {
        throw EvalError("annotation " + std::to_string(g.id) + " lies outside its image");
      }
      gt.annotations.push_back(g);
    }
  } catch (const nlohmann::json::exception& e) {
    throw EvalError(std::string("bad ground truth: ") + e.what());
  }
  return gt;
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& gt) {
  nlohmann::json images = nlohmann::json::array();
  for (const GtImage& g : gt.images) {
    images.push_back(
        {{"id", g.id}, {"width", g.width}, {"height", g.height}, {"file_name", g.file_name}});
  }
  nlohmann::json anns = nlohmann::json::array();
  for (const GtAnnotation& a : gt.annotations) {
    anns.push_back({{"id", a.id},
                    {"image_id", a.image_id},
                    {"bbox", {a.x, a.y, a.w, a.h}},
                    {"area", a.area},
                    {"category_id", a.category_id}});
  }
  return {{"images", std::move(images)}, {"annotations", std::move(anns)}};
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError("cannot parse " + path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

inline GroundTruth load_ground_truth(const std::filesystem::path& path) {
  return ground_truth_from_json(read_json_file(path));
}

/// COCO results records (`bbox` as [x, y, w, h] plus `score`). Each record
/// names its image by `image_id` or by `file_name`.
inline nlohmann::json predictions_to_json(const DetectionSet& set, const std::string& file_name) {
  nlohmann::json out = nlohmann::json::array();
  for (const Detection& d : set.items) {
    out.push_back({{"file_name", file_name},
                   {"bbox", {d.a, d.b, d.c - d.a, d.d - d.b}},
                   {"category_id", d.class_id},
                   {"score", d.score}});
  }
  return out;
}

inline PredictionMap predictions_from_json(const nlohmann::json& j, const GroundTruth& gt) {
  PredictionMap out;
  if (!j.is_array()) throw EvalError("predictions must be a JSON array");
  try {
    for (const auto& rec : j) {
      int image_id;
      if (rec.contains("image_id")) {
        image_id = rec["image_id"].get<int>();
      } else {
        const std::string name = rec.at("file_name").get<std::string>();
        const GtImage* img = gt.find_image(name);
        if (!img) throw EvalError("prediction for unknown image '" + name + "'");
        image_id = img->id;
      }
      if (!gt.find_image(image_id)) {
        throw EvalError("prediction for unknown image_id " + std::to_string(image_id));
      }
      const auto bbox = rec.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) throw EvalError("bbox must have 4 entries");
      Detection d{bbox[0], bbox[1], bbox[0] + bbox[2], bbox[1] + bbox[3],
                  rec.at("category_id").get<int>(), rec.at("score").get<double>()};
      if (auto why = validate(d); !why.empty()) throw EvalError("invalid prediction: " + why);
      out[image_id].items.push_back(d);
    }
  } catch (const nlohmann::json::exception& e) {
    throw EvalError(std::string("bad predictions: ") + e.what());
  }
  return out;
}

inline PredictionMap load_predictions(const std::filesystem::path& path, const GroundTruth& gt) {
  return predictions_from_json(read_json_file(path), gt);
}

}  // namespace srdet

#endif  // SRDET_EVALMAP_HPP_
