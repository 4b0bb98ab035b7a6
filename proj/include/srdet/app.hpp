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
#ifndef SRDET_APP_HPP_
#define SRDET_APP_HPP_

// The `enhance`, `eval` and `bench` commands as library calls. The CLI in
// tools/ only parses arguments and maps exceptions to exit codes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "srdet/config.hpp"
#include "srdet/dedup.hpp"
#include "srdet/evalmap.hpp"
#include "srdet/pipeline.hpp"
#include "srdet/png.hpp"
#include "srdet/remote.hpp"
#include "srdet/report.hpp"
#include "srdet/synthdet.hpp"

namespace srdet {

namespace fs = std::filesystem;

inline std::string class_name(int class_id) {
  switch (class_id) {
    case 1:
      return "person";
    case 2:
      return "bicycle";
    case 3:
      return "car";
    case 4:
      return "motorcycle";
    case 6:
      return "bus";
    case 8:
      return "truck";
    default:
      return "c" + std::to_string(class_id);
  }
}

inline ImageBuffer annotate(const ImageBuffer& img, const DetectionSet& set, Rgb color) {
  ImageBuffer out = img;
  // Lowest score first so the strongest labels end up on top.
  for (auto it = set.items.rbegin(); it != set.items.rend(); ++it) {
    char label[64];
    std::snprintf(label, sizeof label, "%s %.2f", class_name(it->class_id).c_str(), it->score);
    out = draw_box(out, *it, color, label);
  }
  return out;
}

inline std::vector<fs::path> list_frames(const fs::path& dir) {
  std::vector<fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      frames.push_back(entry.path());
    }
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

/// Number of same-class pairs in `set` whose IoU exceeds theta.
inline std::size_t dedup_violations(const DetectionSet& set, double theta) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    for (std::size_t j = i + 1; j < set.items.size(); ++j) {
      if (set.items[i].class_id == set.items[j].class_id &&
          iou(set.items[i], set.items[j]) > theta) {
        ++n;
      }
    }
  }
  return n;
}

struct EnhanceRun {
  SequenceResult sequence;
  std::size_t failed_frames = 0;
};

/// Runs the pipeline over `frames` and writes the output bundle:
///   summary.csv, predictions_{base,merged}.json,
///   predictions/<frame>.{base,merged}.json, annotated/<frame>.{base,merged}.png
inline EnhanceRun enhance_to_dir(const std::vector<fs::path>& frames, const PipelineConfig& cfg,
                                 BackendPool& backends, const fs::path& out_dir) {
  fs::create_directories(out_dir / "predictions");
  fs::create_directories(out_dir / "annotated");
  EnhanceRun run;
  run.sequence = enhance_sequence(frames, cfg, backends);
  write_text_file(out_dir / "summary.csv", run.sequence.csv);

  nlohmann::json all_base = nlohmann::json::array();
  nlohmann::json all_merged = nlohmann::json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameOutcome& f = run.sequence.frames[i];
    if (!f.result) {
      ++run.failed_frames;
      continue;
    }
    const std::string file_name = frames[i].filename().string();
    const auto base = predictions_to_json(f.result->base, file_name);
    const auto merged = predictions_to_json(f.result->merged, file_name);
    write_text_file(out_dir / "predictions" / (f.frame_id + ".base.json"), base.dump(1) + "\n");
    write_text_file(out_dir / "predictions" / (f.frame_id + ".merged.json"),
                    merged.dump(1) + "\n");
    all_base.insert(all_base.end(), base.begin(), base.end());
    all_merged.insert(all_merged.end(), merged.begin(), merged.end());

    const ImageBuffer img = load_png(frames[i]);
    save_png(annotate(img, f.result->base, kBaseColor),
             out_dir / "annotated" / (f.frame_id + ".base.png"));
    save_png(annotate(img, f.result->merged, kEnhancedColor),
             out_dir / "annotated" / (f.frame_id + ".merged.png"));
  }
  write_text_file(out_dir / "predictions_base.json", all_base.dump(1) + "\n");
  write_text_file(out_dir / "predictions_merged.json", all_merged.dump(1) + "\n");
  return run;
}

/// Writes comparison.csv, counts.csv and counts.png; returns the comparison.
inline Comparison write_comparison(const GroundTruth& gt, const PredictionMap& base,
                                   const PredictionMap& enhanced, const EvalSpec& spec,
                                   const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const Comparison c = compare_reports(evaluate(gt, base, spec), evaluate(gt, enhanced, spec));
  write_text_file(out_dir / "comparison.csv", comparison_csv(c));
  write_text_file(out_dir / "counts.csv", count_series_csv(c));
  save_png(render_count_plot(c), out_dir / "counts.png");
  return c;
}

inline BackendFactory backend_factory_for(const RunConfig& rc) {
  if (rc.backend.starts_with("oracle:")) {
    auto scenes = std::make_shared<const std::map<std::string, Scene>>(
        load_scene_dir(rc.backend.substr(7)));
    RecallModel model;
    model.min_area = rc.oracle_min_area;
    model.jitter = rc.oracle_jitter;
    return oracle_factory(std::move(scenes), std::move(model));
  }
  return remote_detector_factory(rc.backend, rc.backend_timeout_ms);
}

/// `enhance`: 0 when every frame succeeded, 1 otherwise. Configuration
/// problems surface as ConfigError before anything is written.
inline int run_enhance(const RunConfig& rc, std::ostream& log) {
  BackendPool pool(backend_factory_for(rc), rc.pipeline.parallel_windows);
  const auto frames = list_frames(rc.frames_dir);
  const EnhanceRun run = enhance_to_dir(frames, rc.pipeline, pool, rc.output_dir);
  for (const FrameOutcome& f : run.sequence.frames) {
    if (!f.result) log << "error: " << f.error << "\n";
  }
  if (rc.gt) {
    const GroundTruth gt = load_ground_truth(*rc.gt);
    const Comparison c = write_comparison(
        gt, load_predictions(rc.output_dir / "predictions_base.json", gt),
        load_predictions(rc.output_dir / "predictions_merged.json", gt), rc.eval, rc.output_dir);
    log << comparison_table(c);
  }
  log << frames.size() - run.failed_frames << "/" << frames.size() << " frames enhanced\n";
  return run.failed_frames == 0 ? 0 : 1;
}

/// `eval`: compares two prediction files against one ground truth.
inline Comparison run_eval(const fs::path& gt_path, const fs::path& base_path,
                           const fs::path& enhanced_path, const EvalSpec& spec,
                           const fs::path& out_dir) {
  const GroundTruth gt = load_ground_truth(gt_path);
  return write_comparison(gt, load_predictions(base_path, gt),
                          load_predictions(enhanced_path, gt), spec, out_dir);
}

// ---------------------------------------------------------------------------
// Synthetic benchmark

struct BenchOptions {
  std::uint64_t seed = 1;
  int frames = 100;
  SceneParams scene = [] {
    SceneParams p;
    p.frame_w = 160;
    p.frame_h = 120;
    p.min_objects = 5;
    p.max_objects = 15;
    p.min_area = 64.0 / 4;
    p.max_area = 64.0 * 4;
    p.class_mix = {{3, 0.7}, {8, 0.15}, {4, 0.1}, {6, 0.05}};
    p.noise_sigma = 5;
    return p;
  }();
  RecallModel recall;  // min_area 64, jitter 0
  PipelineConfig pipeline = [] {
    PipelineConfig c;
    c.parallel_windows = 1;
    return c;
  }();
  EvalSpec eval;
  fs::path out_dir;
};

struct BenchResult {
  GroundTruth gt;
  EvalReport base;
  EvalReport enhanced;
  Comparison comparison;
  std::vector<MatchCounts> counts;
  std::size_t failed_frames = 0;
  std::size_t dedup_violations = 0;
  double seconds = 0;
};

inline std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d", index);
  return buf;
}

/// Scene seed of frame `index` (1-based) in a benchmark with seed `seed`.
inline std::uint64_t frame_seed(std::uint64_t seed, int index) {
  return detail::splitmix64(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(index));
}

/// `bench`: generates frames and ground truth, runs the pipeline with the
/// oracle backend, evaluates base vs merged and writes the whole bundle.
inline BenchResult run_bench(const BenchOptions& opt) {
  if (opt.frames < 0) throw PreconditionError("frame count must be >= 0");
  if (opt.out_dir.empty()) throw PreconditionError("bench needs an output directory");
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path frames_dir = opt.out_dir / "frames";
  const fs::path scenes_dir = opt.out_dir / "scenes";
  fs::create_directories(frames_dir);
  fs::create_directories(scenes_dir);

  BenchResult res;
  auto scenes = std::make_shared<std::map<std::string, Scene>>();
  std::vector<fs::path> frame_paths;
  int ann_id = 1;
  for (int i = 1; i <= opt.frames; ++i) {
    auto [scene, img] = generate_scene(frame_seed(opt.seed, i), opt.scene, frame_name(i));
    const fs::path path = frames_dir / (scene.name + ".png");
    save_png(img, path);
    save_scene(scene, scenes_dir / (scene.name + ".scene.json"));
    frame_paths.push_back(path);
    res.gt.images.push_back({i, scene.frame_w, scene.frame_h, scene.name + ".png"});
    for (const SceneObject& o : scene.objects) {
      res.gt.annotations.push_back({ann_id++, i, static_cast<double>(o.x),
                                    static_cast<double>(o.y), static_cast<double>(o.w),
                                    static_cast<double>(o.h), o.class_id,
                                    static_cast<double>(o.area())});
    }
    scenes->emplace(scene.name, std::move(scene));
  }
  write_text_file(opt.out_dir / "gt.json", ground_truth_to_json(res.gt).dump(1) + "\n");

  BackendPool pool(oracle_factory(scenes, opt.recall), opt.pipeline.parallel_windows);
  const EnhanceRun run = enhance_to_dir(frame_paths, opt.pipeline, pool, opt.out_dir);
  res.failed_frames = run.failed_frames;

  PredictionMap base;
  PredictionMap merged;
  for (std::size_t i = 0; i < run.sequence.frames.size(); ++i) {
    const FrameOutcome& f = run.sequence.frames[i];
    if (!f.result) continue;
    const int image_id = static_cast<int>(i) + 1;
    base[image_id] = f.result->base;
    merged[image_id] = f.result->merged;
    res.counts.push_back(match_counts(f.result->base, f.result->merged));
    res.dedup_violations += dedup_violations(f.result->merged, opt.pipeline.merge.theta);
  }
  res.base = evaluate(res.gt, base, opt.eval);
  res.enhanced = evaluate(res.gt, merged, opt.eval);
  res.comparison = compare_reports(res.base, res.enhanced);
  write_text_file(opt.out_dir / "comparison.csv", comparison_csv(res.comparison));
  write_text_file(opt.out_dir / "counts.csv", count_series_csv(res.comparison));
  save_png(render_count_plot(res.comparison), opt.out_dir / "counts.png");
  res.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace srdet

#endif  // SRDET_APP_HPP_
