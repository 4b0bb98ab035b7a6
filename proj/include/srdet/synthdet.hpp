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
#ifndef SRDET_SYNTHDET_HPP_
#define SRDET_SYNTHDET_HPP_

// Synthetic road-scene stand-in: frames of solid rectangles with known boxes,
// and an oracle detector that sees an object iff its apparent pixel area in
// the presented image reaches a threshold. The oracle reads the scene, not
// the pixels; the rendered frame still flows through the real pipeline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "srdet/detection.hpp"
#include "srdet/detector.hpp"
#include "srdet/error.hpp"
#include "srdet/geometry.hpp"
#include "srdet/imagebuf.hpp"

namespace srdet {

struct SceneObject {
  int x = 0;  // top-left, frame pixels
  int y = 0;
  int w = 1;
  int h = 1;
  int class_id = 3;
  Rgb fill;

  long area() const { return static_cast<long>(w) * h; }
  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  std::string name;  // frame id, e.g. "frame_0001"
  int frame_w = 0;
  int frame_h = 0;
  Rgb background;
  std::uint64_t seed = 0;
  std::vector<SceneObject> objects;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct ClassWeight {
  int class_id = 3;
  double weight = 1;
};

struct SceneParams {
  int frame_w = 160;
  int frame_h = 120;
  int min_objects = 5;
  int max_objects = 15;
  // Side lengths are drawn from [min_side, max_side] unless max_area > 0, in
  // which case the area is uniform in [min_area, max_area] and the aspect
  // ratio (w/h) uniform in [min_aspect, max_aspect].
  int min_side = 4;
  int max_side = 16;
  double min_area = 0;
  double max_area = 0;
  double min_aspect = 0.5;
  double max_aspect = 2.0;
  std::vector<ClassWeight> class_mix = {{3, 1.0}};
  int min_gap = 1;  // free pixels kept between objects; < 0 allows overlap
  double noise_sigma = 0;  // additive Gaussian noise on the rendered frame
  int max_retries = 2000;
};

/// Portable draws on top of mt19937_64 (the std distributions are
/// implementation-defined).
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }
  double normal() {  // Box-Muller
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline ImageBuffer render_scene(const Scene& scene, double noise_sigma = 0) {
  ImageBuffer img(scene.frame_w, scene.frame_h, scene.background);
  for (const SceneObject& o : scene.objects) {
    for (int y = o.y; y < o.y + o.h; ++y) {
      for (int x = o.x; x < o.x + o.w; ++x) img.set(x, y, o.fill);
    }
  }
  if (noise_sigma > 0) {
    SceneRng rng(scene.seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::uint8_t& v : img.pixels()) {
      const double n = v + noise_sigma * rng.normal();
      v = static_cast<std::uint8_t>(std::clamp(std::floor(n + 0.5), 0.0, 255.0));
    }
  }
  return img;
}

/// Deterministic in (seed, params). Objects are placed by rejection sampling
/// and never overlap unless min_gap < 0.
inline std::pair<Scene, ImageBuffer> generate_scene(std::uint64_t seed,
                                                    const SceneParams& params,
                                                    std::string name = {}) {
  if (params.frame_w < 32 || params.frame_h < 32) {
    throw PreconditionError("scene frames must be at least 32x32");
  }
  if (params.min_objects < 0 || params.max_objects < params.min_objects) {
    throw PreconditionError("bad object count range");
  }
  const bool by_area = params.max_area > 0;
  if (by_area ? !(params.min_area > 0 && params.min_area <= params.max_area &&
                  params.min_aspect > 0 && params.min_aspect <= params.max_aspect)
              : (params.min_side < 1 || params.max_side < params.min_side)) {
    throw PreconditionError("bad object size range");
  }
  if (params.class_mix.empty()) throw PreconditionError("empty class mix");
  double total_weight = 0;
  for (const ClassWeight& c : params.class_mix) {
    if (c.class_id < 1 || !(c.weight > 0)) throw PreconditionError("bad class mix entry");
    total_weight += c.weight;
  }

  SceneRng rng(seed);
  Scene scene;
  scene.name = std::move(name);
  scene.frame_w = params.frame_w;
  scene.frame_h = params.frame_h;
  scene.seed = seed;
  scene.background = {static_cast<std::uint8_t>(rng.uniform_int(60, 110)),
                      static_cast<std::uint8_t>(rng.uniform_int(60, 110)),
                      static_cast<std::uint8_t>(rng.uniform_int(60, 110))};

  const int count = rng.uniform_int(params.min_objects, params.max_objects);
  for (int i = 0; i < count; ++i) {
    SceneObject o;
    if (by_area) {
      const double area = rng.uniform(params.min_area, params.max_area);
      const double aspect = rng.uniform(params.min_aspect, params.max_aspect);
      o.w = std::max(1, static_cast<int>(std::lround(std::sqrt(area * aspect))));
      o.h = std::max(1, static_cast<int>(std::lround(area / o.w)));
    } else {
      o.w = rng.uniform_int(params.min_side, params.max_side);
      o.h = rng.uniform_int(params.min_side, params.max_side);
    }
    if (o.w > params.frame_w || o.h > params.frame_h) {
      throw GenerationError("object larger than the frame");
    }
    double pick = rng.uniform() * total_weight;
    o.class_id = params.class_mix.back().class_id;
    for (const ClassWeight& c : params.class_mix) {
      if (pick < c.weight) {
        o.class_id = c.class_id;
        break;
      }
      pick -= c.weight;
    }
    // Fill colors stay clearly away from the background.
    do {
      o.fill = {static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                static_cast<std::uint8_t>(rng.uniform_int(0, 255))};
    } while (std::abs(o.fill.r - scene.background.r) +
                 std::abs(o.fill.g - scene.background.g) +
                 std::abs(o.fill.b - scene.background.b) <
             120);

    bool placed = false;
    for (int attempt = 0; attempt < params.max_retries && !placed; ++attempt) {
      o.x = rng.uniform_int(0, params.frame_w - o.w);
      o.y = rng.uniform_int(0, params.frame_h - o.h);
      if (params.min_gap < 0) {
        placed = true;
        break;
      }
      const int g = params.min_gap;
      placed = std::none_of(scene.objects.begin(), scene.objects.end(),
                            [&](const SceneObject& p) {
                              return o.x < p.x + p.w + g && p.x < o.x + o.w + g &&
                                     o.y < p.y + p.h + g && p.y < o.y + o.h + g;
                            });
    }
    if (!placed) {
      throw GenerationError("could not place object " + std::to_string(i) +
                            " after " + std::to_string(params.max_retries) +
                            " attempts");
    }
    scene.objects.push_back(o);
  }
  ImageBuffer img = render_scene(scene, params.noise_sigma);
  return {std::move(scene), std::move(img)};
}

/// Apparent-area recall: an object is seen iff its visible area, measured in
/// pixels of the presented image, is at least min_area.
struct RecallModel {
  double min_area = 64;
  double floor_score = 0.3;  // score at exactly min_area
  double jitter = 0;         // max corner perturbation, image pixels
  std::uint64_t seed = 0;
  // Optional override; must be monotone nondecreasing in apparent area.
  std::function<double(double)> score_fn;

  double score(double apparent_area) const {
    if (score_fn) return std::clamp(score_fn(apparent_area), 0.0, 1.0);
    return std::clamp(1.0 - (1.0 - floor_score) * min_area / apparent_area, 0.0, 1.0);
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t double_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return bits;
}

}  // namespace detail

/// Detections of `scene` objects in `img`, whose pixels map into the scene
/// frame through `frame`. Boxes are in img-local coordinates, clipped to the
/// visible part of each object.
inline DetectionSet oracle_detect(const ImageBuffer& img,
                                  const CoordinateFrame& frame,
                                  const Scene& scene, const RecallModel& model) {
  const double scale = frame.scale;
  const double vx0 = std::max(0.0, frame.offset.x);
  const double vy0 = std::max(0.0, frame.offset.y);
  const double vx1 = std::min<double>(scene.frame_w, frame.offset.x + img.width() / scale);
  const double vy1 = std::min<double>(scene.frame_h, frame.offset.y + img.height() / scale);

  DetectionSet out;
  out.frame_id = scene.name;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const SceneObject& o = scene.objects[i];
    const double x0 = std::max<double>(o.x, vx0);
    const double y0 = std::max<double>(o.y, vy0);
    const double x1 = std::min<double>(o.x + o.w, vx1);
    const double y1 = std::min<double>(o.y + o.h, vy1);
    if (x1 <= x0 || y1 <= y0) continue;
    const double apparent = (x1 - x0) * (y1 - y0) * scale * scale;
    if (apparent < model.min_area) continue;

    const Point tl = frame_to_window({x0, y0}, frame);
    const Point br = frame_to_window({x1, y1}, frame);
    Detection d{tl.x, tl.y, br.x, br.y, o.class_id, model.score(apparent)};
    if (model.jitter > 0) {
      std::uint64_t h = detail::splitmix64(model.seed ^ detail::splitmix64(scene.seed));
      h = detail::splitmix64(h ^ i);
      h = detail::splitmix64(h ^ detail::double_bits(frame.offset.x));
      h = detail::splitmix64(h ^ detail::double_bits(frame.offset.y));
      h = detail::splitmix64(h ^ detail::double_bits(scale));
      double* corners[4] = {&d.a, &d.b, &d.c, &d.d};
      for (double* c : corners) {
        h = detail::splitmix64(h);
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        *c += model.jitter * (2 * u - 1);
      }
      d.a = std::clamp(d.a, 0.0, static_cast<double>(img.width()));
      d.c = std::clamp(d.c, 0.0, static_cast<double>(img.width()));
      d.b = std::clamp(d.b, 0.0, static_cast<double>(img.height()));
      d.d = std::clamp(d.d, 0.0, static_cast<double>(img.height()));
      if (d.a > d.c) std::swap(d.a, d.c);
      if (d.b > d.d) std::swap(d.b, d.d);
    }
    out.items.push_back(d);
  }
  return out;
}

/// Oracle as a pluggable backend; scenes are looked up by frame id.
class OracleBackend : public DetectorBackend {
 public:
  OracleBackend(std::shared_ptr<const std::map<std::string, Scene>> scenes,
                RecallModel model)
      : scenes_(std::move(scenes)), model_(std::move(model)) {}

  std::vector<Detection> infer(const ImageBuffer& img, const DetectorConfig&,
                               const FrameContext& ctx) override {
    const auto it = scenes_->find(ctx.frame_id);
    if (it == scenes_->end()) {
      throw DetectionError("oracle has no scene for frame '" + ctx.frame_id + "'");
    }
    return oracle_detect(img, ctx.frame, it->second, model_).items;
  }

 private:
  std::shared_ptr<const std::map<std::string, Scene>> scenes_;
  RecallModel model_;
};

inline BackendFactory oracle_factory(
    std::shared_ptr<const std::map<std::string, Scene>> scenes, RecallModel model) {
  return [scenes = std::move(scenes), model = std::move(model)] {
    return std::make_unique<OracleBackend>(scenes, model);
  };
}

// Scene files share the ground-truth schema (one image, its annotations)
// with an extra "scene" object and per-annotation "fill".

inline nlohmann::json scene_to_json(const Scene& scene, int image_id = 1,
                                    int first_annotation_id = 1) {
  nlohmann::json anns = nlohmann::json::array();
  int ann_id = first_annotation_id;
  for (const SceneObject& o : scene.objects) {
    anns.push_back({{"id", ann_id++},
                    {"image_id", image_id},
                    {"bbox", {o.x, o.y, o.w, o.h}},
                    {"area", o.area()},
                    {"category_id", o.class_id},
                    {"fill", {o.fill.r, o.fill.g, o.fill.b}}});
  }
  return {{"images",
           {{{"id", image_id},
             {"file_name", scene.name + ".png"},
             {"width", scene.frame_w},
             {"height", scene.frame_h}}}},
          {"annotations", std::move(anns)},
          {"scene",
           {{"name", scene.name},
            {"seed", scene.seed},
            {"background", {scene.background.r, scene.background.g, scene.background.b}}}}};
}

inline Scene scene_from_json(const nlohmann::json& j) {
  try {
    Scene s;
    const auto& meta = j.at("scene");
    s.name = meta.at("name").get<std::string>();
    s.seed = meta.at("seed").get<std::uint64_t>();
    const auto bg = meta.at("background").get<std::vector<int>>();
    if (bg.size() != 3) throw DecodeError("background must have 3 channels");
    s.background = {static_cast<std::uint8_t>(bg[0]), static_cast<std::uint8_t>(bg[1]),
                    static_cast<std::uint8_t>(bg[2])};
    const auto& img = j.at("images").at(0);
    s.frame_w = img.at("width").get<int>();
    s.frame_h = img.at("height").get<int>();
    for (const auto& a : j.at("annotations")) {
      const auto bbox = a.at("bbox").get<std::vector<int>>();
      const auto fill = a.at("fill").get<std::vector<int>>();
      if (bbox.size() != 4 || fill.size() != 3) throw DecodeError("bad annotation");
      SceneObject o{bbox[0], bbox[1], bbox[2], bbox[3], a.at("category_id").get<int>(),
                    {static_cast<std::uint8_t>(fill[0]), static_cast<std::uint8_t>(fill[1]),
                     static_cast<std::uint8_t>(fill[2])}};
      if (o.w < 1 || o.h < 1 || o.x < 0 || o.y < 0 || o.x + o.w > s.frame_w ||
          o.y + o.h > s.frame_h) {
        throw DecodeError("scene object outside frame");
      }
      s.objects.push_back(o);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("bad scene file: ") + e.what());
  }
}

inline void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << scene_to_json(scene).dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

inline Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return scene_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError("cannot parse " + path.string() + ": " + e.what());
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

/// Loads every `*.scene.json` in `dir`, keyed by scene name.
inline std::map<std::string, Scene> load_scene_dir(const std::filesystem::path& dir) {
  std::map<std::string, Scene> scenes;
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("scene directory not found: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string fname = entry.path().filename().string();
    if (!fname.ends_with(".scene.json")) continue;
    Scene s = load_scene(entry.path());
    scenes.emplace(s.name, std::move(s));
  }
  return scenes;
}

}  // namespace srdet

#endif  // SRDET_SYNTHDET_HPP_
