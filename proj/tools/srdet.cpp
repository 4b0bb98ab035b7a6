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

// srdet command-line tool: enhance, eval and bench.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "srdet/srdet.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFrameError = 1;
constexpr int kExitConfigError = 2;

int enhance_main(const std::optional<std::string>& config_path,
                 const std::map<std::string, std::optional<std::string>>& flags) {
  try {
    srdet::KeyValues file_values;
    if (config_path) file_values = srdet::load_config_file(*config_path);
    srdet::KeyValues overrides;
    for (const auto& [key, value] : flags) {
      if (value) overrides[key] = *value;
    }
    const srdet::RunConfig rc = srdet::resolve_run_config(file_values, overrides);
    return srdet::run_enhance(rc, std::cerr) == 0 ? kExitOk : kExitFrameError;
  } catch (const srdet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int eval_main(const std::string& gt, const std::string& base, const std::string& enhanced,
              const std::string& classes, const std::string& out) {
  srdet::EvalSpec spec;
  try {
    if (!classes.empty()) spec.class_filter = srdet::parse_class_list(classes);
    const srdet::Comparison c = srdet::run_eval(gt, base, enhanced, spec, out);
    std::cout << srdet::comparison_table(c);
    return kExitOk;
  } catch (const srdet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const srdet::EvalError& e) {
    std::cerr << "eval error: " << e.what() << "\n";
  } catch (const srdet::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
  } catch (const srdet::DecodeError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
  }
  return kExitConfigError;
}

int bench_main(const srdet::BenchOptions& opt) {
  const srdet::BenchResult r = srdet::run_bench(opt);
  std::cout << srdet::comparison_table(r.comparison);
  std::size_t grown = 0;
  for (const auto& c : r.counts) grown += c.n_merged >= c.n_base ? 1 : 0;
  std::printf("frames with n_merged >= n_base: %zu/%zu\n", grown, r.counts.size());
  std::printf("dedup violations: %zu\n", r.dedup_violations);
  std::printf("elapsed: %.2f s\n", r.seconds);
  return r.failed_frames == 0 ? kExitOk : kExitFrameError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-object detection through super-resolved re-inference"};
  app.require_subcommand(1);

  auto* enhance = app.add_subcommand("enhance", "run the pipeline over a directory of frames");
  std::optional<std::string> config_path;
  enhance->add_option("--config", config_path, "key = value configuration file");
  std::map<std::string, std::optional<std::string>> flags;
  for (const srdet::ConfigKey& k : srdet::kConfigKeys) {
    std::string help(k.help);
    if (!k.default_value.empty()) help += " [" + std::string(k.default_value) + "]";
    enhance->add_option("--" + std::string(k.name), flags[std::string(k.name)], help);
  }

  auto* eval = app.add_subcommand("eval", "compare base and enhanced predictions");
  std::string gt, base, enhanced, classes, eval_out = ".";
  eval->add_option("--gt", gt, "ground-truth JSON")->required();
  eval->add_option("--base", base, "base predictions JSON")->required();
  eval->add_option("--enhanced", enhanced, "enhanced predictions JSON")->required();
  eval->add_option("--classes", classes, "comma-separated category filter, e.g. 3");
  eval->add_option("--out", eval_out, "output directory")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "synthetic recovery benchmark with the oracle detector");
  srdet::BenchOptions opt;
  std::string bench_out = "bench_out";
  int threads = 1;
  bool no_denoise = false;
  bench->add_option("--seed", opt.seed, "benchmark seed")->capture_default_str();
  bench->add_option("--frames", opt.frames, "number of frames")->capture_default_str();
  bench->add_option("--out", bench_out, "output directory")->capture_default_str();
  bench->add_option("--width", opt.scene.frame_w, "frame width")->capture_default_str();
  bench->add_option("--height", opt.scene.frame_h, "frame height")->capture_default_str();
  bench->add_option("--zoom", opt.pipeline.zoom, "zoom factor")->capture_default_str();
  bench->add_option("--noise", opt.scene.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  bench->add_option("--min-area", opt.recall.min_area, "oracle minimum apparent area")
      ->capture_default_str();
  bench->add_option("--threads", threads, "worker threads")->capture_default_str();
  bench->add_flag("--no-denoise", no_denoise, "skip the NLM stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (*enhance) return enhance_main(config_path, flags);
    if (*eval) return eval_main(gt, base, enhanced, classes, eval_out);
    opt.out_dir = bench_out;
    opt.pipeline.parallel_windows = threads;
    opt.pipeline.denoise = !no_denoise;
    opt.scene.min_area = opt.recall.min_area / 4;
    opt.scene.max_area = opt.recall.min_area * 4;
    try {
      opt.pipeline.check();
    } catch (const srdet::PreconditionError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfigError;
    }
    return bench_main(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFrameError;
  }
}
