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
#ifndef SRDET_CONFIG_HPP_
#define SRDET_CONFIG_HPP_

// Flat `key = value` run configuration. Blank lines and lines starting with
// '#' are skipped. Unknown and repeated keys are rejected.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "srdet/error.hpp"
#include "srdet/evalmap.hpp"
#include "srdet/pipeline.hpp"

namespace srdet {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;  // empty: no default
  std::string_view help;
};

inline constexpr std::array<ConfigKey, 22> kConfigKeys = {{
    {"frames_dir", "", "directory of input PNG frames (required)"},
    {"output_dir", "", "directory for all outputs (required)"},
    {"backend", "", "detector URI: exec:<cmd>, tcp:<host>:<port> or oracle:<scene dir>"},
    {"backend_timeout_ms", "60000", "per-request timeout for exec/tcp backends"},
    {"upscale", "bicubic", "nearest, bicubic or external"},
    {"sr_backend", "", "super-resolution URI, required when upscale = external"},
    {"zoom", "2", "integer zoom factor Z >= 2"},
    {"denoise", "on", "non-local means on the upscaled frame (on/off)"},
    {"nlm_h", "10", "NLM filtering strength"},
    {"nlm_patch_radius", "3", "NLM patch radius"},
    {"nlm_search_radius", "10", "NLM search radius"},
    {"nlm_sigma", "0", "noise sigma subtracted in NLM weights, or 'auto'"},
    {"max_detections", "100", "detections kept per pass"},
    {"min_score", "0.3", "minimum detection score"},
    {"iou_threshold", "0.1", "IoU above which two detections are the same object"},
    {"class_aware", "true", "only merge detections of the same class"},
    {"parallel_windows", "0", "worker threads for windows and NLM rows; 0 = all cores"},
    {"record_timings", "false", "fill the stage timing columns of summary.csv"},
    {"oracle_min_area", "64", "oracle backend: minimum apparent area in pixels"},
    {"oracle_jitter", "0", "oracle backend: max corner jitter in pixels"},
    {"gt", "", "optional ground-truth file; enables the evaluation report"},
    {"classes", "", "optional comma-separated category filter for evaluation"},
}};

inline const ConfigKey* find_config_key(std::string_view name) {
  for (const ConfigKey& k : kConfigKeys) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_config_text(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (!find_config_key(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
  }
  return kv;
}

inline KeyValues load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

struct RunConfig {
  std::filesystem::path frames_dir;
  std::filesystem::path output_dir;
  std::string backend;
  int backend_timeout_ms = 60000;
  PipelineConfig pipeline;
  double oracle_min_area = 64;
  double oracle_jitter = 0;
  std::optional<std::filesystem::path> gt;
  EvalSpec eval;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
  return d;
}

inline int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

}  // namespace detail

inline std::vector<int> parse_class_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    out.push_back(detail::parse_int("classes", item));
  }
  if (out.empty()) throw ConfigError("empty class list");
  return out;
}

/// Builds a RunConfig from file values, then command-line overrides, then
/// the SRD_BACKEND environment variable (highest precedence for `backend`).
/// Referenced paths must exist.
inline RunConfig resolve_run_config(const KeyValues& file_values, const KeyValues& overrides,
                                    const char* env_backend = std::getenv("SRD_BACKEND")) {
  KeyValues kv;
  for (const ConfigKey& k : kConfigKeys) {
    if (!k.default_value.empty()) kv[std::string(k.name)] = std::string(k.default_value);
  }
  for (const KeyValues* layer : {&file_values, &overrides}) {
    for (const auto& [key, value] : *layer) {
      if (!find_config_key(key)) throw ConfigError("unknown key '" + key + "'");
      kv[key] = value;
    }
  }
  if (env_backend && *env_backend) kv["backend"] = env_backend;

  auto get = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    return it == kv.end() ? std::string{} : it->second;
  };
  auto require = [&](const char* key) {
    std::string v = get(key);
    if (v.empty()) throw ConfigError("missing required key '" + std::string(key) + "'");
    return v;
  };

  RunConfig rc;
  rc.frames_dir = require("frames_dir");
  rc.output_dir = require("output_dir");
  rc.backend = require("backend");
  rc.backend_timeout_ms = detail::parse_int("backend_timeout_ms", get("backend_timeout_ms"));

  PipelineConfig& p = rc.pipeline;
  p.method.kind = parse_upscale_kind(get("upscale"));
  p.method.backend_uri = get("sr_backend");
  p.method.timeout_ms = rc.backend_timeout_ms;
  p.zoom = detail::parse_int("zoom", get("zoom"));
  p.denoise = detail::parse_bool("denoise", get("denoise"));
  p.nlm.h = detail::parse_double("nlm_h", get("nlm_h"));
  p.nlm.patch_radius = detail::parse_int("nlm_patch_radius", get("nlm_patch_radius"));
  p.nlm.search_radius = detail::parse_int("nlm_search_radius", get("nlm_search_radius"));
  if (get("nlm_sigma") == "auto") {
    p.auto_sigma = true;
  } else {
    p.nlm.sigma = detail::parse_double("nlm_sigma", get("nlm_sigma"));
  }
  p.detector.max_detections = detail::parse_int("max_detections", get("max_detections"));
  p.detector.min_score = detail::parse_double("min_score", get("min_score"));
  p.merge.theta = detail::parse_double("iou_threshold", get("iou_threshold"));
  p.merge.class_aware = detail::parse_bool("class_aware", get("class_aware"));
  const int workers = detail::parse_int("parallel_windows", get("parallel_windows"));
  p.parallel_windows = workers == 0 ? default_worker_count() : workers;
  p.record_timings = detail::parse_bool("record_timings", get("record_timings"));
  rc.oracle_min_area = detail::parse_double("oracle_min_area", get("oracle_min_area"));
  rc.oracle_jitter = detail::parse_double("oracle_jitter", get("oracle_jitter"));
  if (auto g = get("gt"); !g.empty()) rc.gt = g;
  if (auto c = get("classes"); !c.empty()) rc.eval.class_filter = parse_class_list(c);

  try {
    p.check();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (!(rc.oracle_min_area > 0)) throw ConfigError("oracle_min_area must be > 0");
  if (rc.oracle_jitter < 0) throw ConfigError("oracle_jitter must be >= 0");

  if (!std::filesystem::is_directory(rc.frames_dir)) {
    throw ConfigError("frames_dir does not exist: " + rc.frames_dir.string());
  }
  if (rc.gt && !std::filesystem::is_regular_file(*rc.gt)) {
    throw ConfigError("gt file does not exist: " + rc.gt->string());
  }
  if (rc.backend.starts_with("oracle:") &&
      !std::filesystem::is_directory(rc.backend.substr(7))) {
    throw ConfigError("oracle scene directory does not exist: " + rc.backend.substr(7));
  }
  if (!rc.backend.starts_with("oracle:") && !rc.backend.starts_with("exec:") &&
      !rc.backend.starts_with("tcp:")) {
    throw ConfigError("unsupported backend URI: " + rc.backend);
  }
  return rc;
}

}  // namespace srdet

#endif  // SRDET_CONFIG_HPP_
