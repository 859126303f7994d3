// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

// dda: command-line front end for moire scoring, routing, supernet training,
// dynamic inference, benchmarking, metrics and synthetic data generation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dda/metrics.hpp"
#include "dda/moire_prior.hpp"
#include "dda/parallel.hpp"
#include "dda/pipeline.hpp"
#include "dda/png_io.hpp"
#include "dda/router.hpp"
#include "dda/supernet.hpp"
#include "dda/synthgen.hpp"
#include "dda/trainer.hpp"

using nlohmann::json;

namespace {

struct Config {
  int patch = -1;  // sets both dims when given
  int patch_height = 512;
  int patch_width = 512;
  std::string widths_text = "0.25,0.5,0.75";
  int groups = 0;  // 0: take from the width list
  double sigma = 5.0;
  std::string policy = "per-image";
  std::string thresholds_path;
  std::string weights_path;
  std::uint64_t seed = 0;
  int threads = 0;

  std::vector<double> widths;
  dda::PriorConfig prior;
};

std::vector<double> parse_widths(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw dda::InvalidArgument("bad width '" + item + "'");
    }
    if (used != item.size()) throw dda::InvalidArgument("bad width '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// Validates everything up front; strict widths are required for training.
void finalize(Config& cfg, bool strict_widths) {
  if (cfg.patch != -1) cfg.patch_height = cfg.patch_width = cfg.patch;
  if (cfg.patch_height < 1 || cfg.patch_width < 1)
    throw dda::InvalidArgument("patch dimensions must be >= 1");
  cfg.widths = parse_widths(cfg.widths_text);
  dda::validate_widths(cfg.widths, strict_widths);
  if (cfg.groups == 0) cfg.groups = static_cast<int>(cfg.widths.size());
  if (cfg.groups != static_cast<int>(cfg.widths.size()))
    throw dda::InvalidArgument("--groups " + std::to_string(cfg.groups) + " does not match " +
                               std::to_string(cfg.widths.size()) + " widths");
  cfg.prior = dda::PriorConfig::with_sigma(cfg.sigma);
  dda::grouping_policy_from_string(cfg.policy);
  int threads = cfg.threads > 0 ? cfg.threads : dda::thread_count_from_env();
  dda::set_thread_count(threads);
}

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

json flops_json(const dda::FlopsReport& r) {
  json groups = json::array();
  for (const auto& g : r.per_group)
    groups.push_back({{"group", g.group}, {"width", g.width}, {"patches", g.patches},
                      {"flops", g.flops}});
  return {{"per_group", groups},
          {"total_dda", r.total_dda},
          {"total_baseline", r.total_baseline},
          {"reduction_fraction", r.reduction_fraction}};
}

json metrics_json(const dda::MetricResult& m) {
  return {{"psnr_db", number(m.psnr_db)}, {"ssim", number(m.ssim)}, {"delta_e", number(m.delta_e)}};
}

std::filesystem::path thresholds_sidecar(const std::filesystem::path& weights) {
  return weights.string() + ".thresholds.json";
}

dda::Thresholds load_thresholds(const Config& cfg) {
  std::filesystem::path path = cfg.thresholds_path;
  if (path.empty()) {
    if (cfg.weights_path.empty())
      throw dda::InvalidArgument("threshold policy needs --thresholds or --weights");
    path = thresholds_sidecar(cfg.weights_path);
  }
  std::ifstream in(path);
  if (!in) throw dda::IoError("cannot open thresholds file " + path.string());
  json j;
  try {
    in >> j;
    dda::Thresholds t{j.at("cutpoints").get<std::vector<double>>()};
    return t;
  } catch (const json::exception& e) {
    throw dda::IoError("malformed thresholds file " + path.string() + ": " + e.what());
  }
}

dda::DdaConfig dda_config(const Config& cfg) {
  dda::DdaConfig c;
  c.widths = cfg.widths;
  c.patch_height = cfg.patch_height;
  c.patch_width = cfg.patch_width;
  c.prior = cfg.prior;
  c.policy = dda::grouping_policy_from_string(cfg.policy);
  if (c.policy == dda::GroupingPolicy::kThreshold) {
    c.thresholds = load_thresholds(cfg);
    if (c.thresholds->num_groups() != static_cast<int>(c.widths.size()))
      throw dda::InvalidArgument("thresholds define " +
                                 std::to_string(c.thresholds->num_groups()) +
                                 " groups but " + std::to_string(c.widths.size()) +
                                 " widths were given");
  }
  return c;
}

void add_common(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--patch", cfg.patch, "Square patch size (overrides height/width)");
  cmd->add_option("--patch-height", cfg.patch_height, "Patch height in pixels");
  cmd->add_option("--patch-width", cfg.patch_width, "Patch width in pixels");
  cmd->add_option("--widths", cfg.widths_text, "Comma-separated subnet widths, ascending");
  cmd->add_option("--groups", cfg.groups, "Number of complexity groups M");
  cmd->add_option("--sigma", cfg.sigma, "Gaussian high-pass standard deviation");
  cmd->add_option("--policy", cfg.policy, "Grouping policy: per-image | threshold");
  cmd->add_option("--thresholds", cfg.thresholds_path, "Thresholds JSON for --policy threshold");
  cmd->add_option("--threads", cfg.threads, "Worker threads (fallback: DDA_THREADS)");
}

// --- subcommands -------------------------------------------------------------

int cmd_score(Config& cfg, const std::string& image_path, const std::string& heatmap_path) {
  finalize(cfg, false);
  const dda::Image image = dda::load_png(image_path);
  const dda::PatchGrid grid = dda::split(image, cfg.patch_height, cfg.patch_width);
  const auto scores = dda::score_grid(image, grid, cfg.prior);
  json out = json::array();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& e = grid.entries[i];
    out.push_back({{"index", i},
                   {"row", e.row},
                   {"col", e.col},
                   {"colorfulness", scores[i].colorfulness},
                   {"frequency_mean", scores[i].frequency_mean},
                   {"score", scores[i].score}});
  }
  if (!heatmap_path.empty()) {
    double lo = 0.0, hi = 0.0;
    if (!scores.empty()) {
      auto [mn, mx] = std::minmax_element(scores.begin(), scores.end(),
                                          [](auto& a, auto& b) { return a.score < b.score; });
      lo = mn->score;
      hi = mx->score;
    }
    dda::Plane heat(image.height(), image.width());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      // Normalized to the image's score range; a flat range maps to black.
      const double v = hi > lo ? (scores[i].score - lo) / (hi - lo) : 0.0;
      const auto& e = grid.entries[i];
      for (int r = 0; r < e.height; ++r)
        for (int c = 0; c < e.width; ++c) heat.at(e.row + r, e.col + c) = v;
    }
    dda::save_png_gray(heat, heatmap_path);
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_route(Config& cfg, const std::string& image_path) {
  finalize(cfg, false);
  const dda::Image image = dda::load_png(image_path);
  const dda::PatchGrid grid = dda::split(image, cfg.patch_height, cfg.patch_width);
  const auto scores = dda::score_grid(image, grid, cfg.prior);
  std::vector<double> values;
  for (const auto& s : scores) values.push_back(s.score);
  const dda::DdaConfig c = dda_config(cfg);
  const dda::GroupAssignment a = c.policy == dda::GroupingPolicy::kThreshold
                                     ? dda::assign_by_thresholds(values, *c.thresholds, c.widths)
                                     : dda::assign_groups_relaxed(values, c.widths);
  json out = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.push_back({{"patch_index", i},
                   {"row", grid.entries[i].row},
                   {"col", grid.entries[i].col},
                   {"score", values[i]},
                   {"rank", a.rank_of[i]},
                   {"group", a.group_of[i]},
                   {"width", a.width_of(i)}});
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct TrainFlags {
  std::string manifest;
  std::string out;
  std::string log_path;
  int epochs = 1;
  int batch = 4;
  double lr = 1e-4;
  bool no_decay = false;
  int layers = 6;
  int channels = 32;
  int kernel = 3;
};

int cmd_train(Config& cfg, const TrainFlags& f) {
  finalize(cfg, true);
  if (f.out.empty()) throw dda::InvalidArgument("--out is required");
  if (f.epochs < 0) throw dda::InvalidArgument("--epochs must be >= 0");
  dda::SupernetSpec spec{f.layers, f.channels, f.kernel, true};
  spec.validate();
  const auto pairs = dda::load_training_pairs(f.manifest);
  if (pairs.empty()) throw dda::InvalidArgument("manifest lists no pairs");

  dda::TrainOptions opts;
  opts.widths = cfg.widths;
  opts.epochs = f.epochs;
  opts.batch_size = f.batch;
  opts.learning_rate = f.lr;
  opts.step_decay = !f.no_decay;
  opts.seed = cfg.seed;
  if (!cfg.thresholds_path.empty()) opts.thresholds = load_thresholds(cfg);

  std::ofstream log_file;
  std::ostream* log = &std::cout;
  if (!f.log_path.empty()) {
    log_file.open(f.log_path);
    if (!log_file) throw dda::IoError("cannot write log " + f.log_path);
    log = &log_file;
  }
  const auto result = dda::train_supernet(pairs, spec, opts, [&](const dda::TrainLogEntry& e) {
    *log << json{{"epoch", e.epoch}, {"width", e.width}, {"mean_loss", e.mean_loss}}.dump()
         << std::endl;
  });
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

  dda::save_weights(result.weights, f.out);
  std::ofstream th(thresholds_sidecar(f.out));
  th << json{{"cutpoints", result.thresholds.cutpoints}, {"widths", cfg.widths}}.dump(2) << '\n';
  if (!th) throw dda::IoError("cannot write thresholds sidecar");
  return 0;
}

int cmd_infer(Config& cfg, const std::string& image_path, const std::string& out_path, bool full) {
  finalize(cfg, false);
  if (cfg.weights_path.empty()) throw dda::InvalidArgument("--weights is required");
  if (out_path.empty()) throw dda::InvalidArgument("--out is required");
  const dda::SupernetWeights weights = dda::load_weights(cfg.weights_path);
  const dda::Image image = dda::load_png(image_path);
  json report;
  if (full) {
    const auto r = dda::demoire_full(image, weights, cfg.patch_height, cfg.patch_width);
    dda::save_png(r.output, out_path);
    report = flops_json(r.report);
    report["mode"] = "full";
  } else {
    const auto r = dda::demoire_dda(image, weights, dda_config(cfg));
    dda::save_png(r.output, out_path);
    report = flops_json(r.report);
    report["mode"] = "dda";
    report["policy"] = cfg.policy;
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

json timing_json(std::vector<double> seconds) {
  std::sort(seconds.begin(), seconds.end());
  const std::size_t n = seconds.size();
  const double median = n % 2 ? seconds[n / 2] : 0.5 * (seconds[n / 2 - 1] + seconds[n / 2]);
  return {{"median_s", median}, {"min_s", seconds.front()}, {"samples", n}};
}

int cmd_bench(Config& cfg, const std::string& image_path, int repetitions) {
  finalize(cfg, false);
  if (repetitions < 1) throw dda::InvalidArgument("--repetitions must be >= 1");
  if (cfg.weights_path.empty()) throw dda::InvalidArgument("--weights is required");
  const dda::SupernetWeights weights = dda::load_weights(cfg.weights_path);
  const dda::Image image = dda::load_png(image_path);
  const dda::DdaConfig c = dda_config(cfg);

  using clock = std::chrono::steady_clock;
  std::vector<double> full_t, dda_t;
  dda::FlopsReport full_report, dda_report;
  for (int i = 0; i < repetitions; ++i) {
    auto t0 = clock::now();
    full_report = dda::demoire_full(image, weights, cfg.patch_height, cfg.patch_width).report;
    auto t1 = clock::now();
    dda_report = dda::demoire_dda(image, weights, c).report;
    auto t2 = clock::now();
    full_t.push_back(std::chrono::duration<double>(t1 - t0).count());
    dda_t.push_back(std::chrono::duration<double>(t2 - t1).count());
  }
  json out{{"repetitions", repetitions},
           {"threads", dda::thread_count()},
           {"full", timing_json(full_t)},
           {"dda", timing_json(dda_t)}};
  out["full"]["flops"] = flops_json(full_report);
  out["dda"]["flops"] = flops_json(dda_report);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_metrics(Config& cfg, const std::string& a_path, const std::string& b_path) {
  dda::set_thread_count(cfg.threads > 0 ? cfg.threads : dda::thread_count_from_env());
  const dda::Image a = dda::load_png(a_path);
  const dda::Image b = dda::load_png(b_path);
  std::cout << metrics_json(dda::compute_metrics(a, b)).dump(2) << '\n';
  return 0;
}

int cmd_gen(Config& cfg, const std::string& out_dir, int n, double moire_free_rate) {
  finalize(cfg, false);
  if (n < 0) throw dda::InvalidArgument("--n must be >= 0");
  dda::GenOptions opts;
  opts.patch_height = cfg.patch != -1 ? cfg.patch_height : 64;
  opts.patch_width = cfg.patch != -1 ? cfg.patch_width : 64;
  opts.moire_free_rate = moire_free_rate;
  opts.prior = cfg.prior;
  const auto manifest = dda::gen_dataset(n, cfg.seed, out_dir, opts);
  std::cout << json{{"manifest", manifest.string()}, {"pairs", n}}.dump(2) << '\n';
  return 0;
}

int cmd_eval(Config& cfg, const std::string& manifest) {
  finalize(cfg, false);
  if (cfg.weights_path.empty()) throw dda::InvalidArgument("--weights is required");
  const dda::SupernetWeights weights = dda::load_weights(cfg.weights_path);
  const auto entries = dda::read_manifest(manifest);
  const auto dir = std::filesystem::path(manifest).parent_path();
  std::vector<dda::EvalPair> pairs;
  for (const auto& e : entries)
    pairs.push_back({e.moire_path, dda::load_png(dir / e.moire_path),
                     dda::load_png(dir / e.clean_path)});
  const auto report = dda::evaluate(pairs, weights, dda_config(cfg));

  json per_image = json::array();
  for (const auto& e : report.per_image)
    per_image.push_back({{"file", e.file},
                         {"psnr_db", number(e.metrics.psnr_db)},
                         {"ssim", number(e.metrics.ssim)},
                         {"delta_e", number(e.metrics.delta_e)},
                         {"input_psnr_db", number(e.input_metrics.psnr_db)},
                         {"flops_dda", e.flops_dda},
                         {"flops_baseline", e.flops_baseline}});
  json out{{"per_image", per_image},
           {"summary",
            {{"mean_psnr_db", number(report.mean_psnr_db)},
             {"mean_ssim", number(report.mean_ssim)},
             {"mean_delta_e", number(report.mean_delta_e)},
             {"mean_input_psnr_db", number(report.mean_input_psnr_db)},
             {"reduction_fraction", report.reduction_fraction}}}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic demoireing acceleration toolchain"};
  app.require_subcommand(1);
  Config cfg;

  std::string image, image_b, out, heatmap, dir;
  bool full = false;
  int repetitions = 5;
  int n_pairs = 100;
  double moire_free_rate = 0.2;
  TrainFlags tf;

  auto* score = app.add_subcommand("score", "Per-patch moire complexity scores");
  score->add_option("image", image, "Input PNG")->required();
  score->add_option("--heatmap", heatmap, "Write a normalized score heatmap PNG");
  add_common(score, cfg);

  auto* route = app.add_subcommand("route", "Patch -> group -> width assignment");
  route->add_option("image", image, "Input PNG")->required();
  route->add_option("--weights", cfg.weights_path, "Weights (for its thresholds sidecar)");
  add_common(route, cfg);

  auto* train = app.add_subcommand("train", "Train the weight-shared supernet");
  train->add_option("manifest", tf.manifest, "Dataset manifest.json")->required();
  train->add_option("--out", tf.out, "Output weights path")->required();
  train->add_option("--epochs", tf.epochs, "Training epochs");
  train->add_option("--batch", tf.batch, "Batch size");
  train->add_option("--lr", tf.lr, "Adam learning rate");
  train->add_flag("--no-decay", tf.no_decay, "Disable the /10 steps at 1/2 and 3/4 of training");
  train->add_option("--layers", tf.layers, "Convolution layers");
  train->add_option("--channels", tf.channels, "Full-width hidden channels");
  train->add_option("--kernel", tf.kernel, "Kernel size (odd)");
  train->add_option("--log", tf.log_path, "Write the JSON-lines log here instead of stdout");
  train->add_option("--seed", cfg.seed, "Seed");
  add_common(train, cfg);

  auto* infer = app.add_subcommand("infer", "Restore an image with the DDA pipeline");
  infer->add_option("image", image, "Input PNG")->required();
  infer->add_option("--weights", cfg.weights_path, "DDAW weights")->required();
  infer->add_option("--out", out, "Output PNG")->required();
  infer->add_flag("--full", full, "Run every patch at full width (baseline)");
  add_common(infer, cfg);

  auto* bench = app.add_subcommand("bench", "Time full vs DDA inference");
  bench->add_option("image", image, "Input PNG")->required();
  bench->add_option("--weights", cfg.weights_path, "DDAW weights")->required();
  bench->add_option("--repetitions", repetitions, "Timed repetitions");
  add_common(bench, cfg);

  auto* metrics = app.add_subcommand("metrics", "PSNR / SSIM / CIEDE2000 between two PNGs");
  metrics->add_option("a", image, "First PNG")->required();
  metrics->add_option("b", image_b, "Second PNG")->required();
  metrics->add_option("--threads", cfg.threads, "Worker threads");

  auto* gen = app.add_subcommand("gen", "Generate synthetic (clean, moire) pairs");
  gen->add_option("out_dir", dir, "Output directory")->required();
  gen->add_option("--n", n_pairs, "Number of pairs");
  gen->add_option("--seed", cfg.seed, "Seed");
  gen->add_option("--moire-free-rate", moire_free_rate, "Fraction of moire-free pairs");
  add_common(gen, cfg);

  auto* eval = app.add_subcommand("eval", "Evaluate a manifest with the DDA pipeline");
  eval->add_option("manifest", dir, "Dataset manifest.json")->required();
  eval->add_option("--weights", cfg.weights_path, "DDAW weights")->required();
  add_common(eval, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*score) return cmd_score(cfg, image, heatmap);
    if (*route) return cmd_route(cfg, image);
    if (*train) return cmd_train(cfg, tf);
    if (*infer) return cmd_infer(cfg, image, out, full);
    if (*bench) return cmd_bench(cfg, image, repetitions);
    if (*metrics) return cmd_metrics(cfg, image, image_b);
    if (*gen) return cmd_gen(cfg, dir, n_pairs, moire_free_rate);
    if (*eval) return cmd_eval(cfg, dir);
  } catch (const std::exception& e) {
    std::cerr << "dda: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
