// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

// Drives the dda executable end to end through a shell.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>
#include <png.h>
#include <sys/wait.h>

#include "dda/png_io.hpp"
#include "dda/supernet.hpp"
#include "test_util.hpp"

namespace dda {
namespace {

using nlohmann::json;
using testing::scratch_dir;

struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun invoke(const std::string& args) {
  const std::string cmd = std::string(DDA_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  CliRun r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// 8-bit grayscale reader for the heatmap output.
std::vector<std::uint8_t> read_gray(const std::filesystem::path& path, int& w, int& h) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  std::vector<std::uint8_t> px;
  if (!png_image_begin_read_from_file(&img, path.c_str())) return px;
  EXPECT_EQ(img.format, static_cast<png_uint_32>(PNG_FORMAT_GRAY));
  img.format = PNG_FORMAT_GRAY;
  px.resize(PNG_IMAGE_SIZE(img));
  png_image_finish_read(&img, nullptr, px.data(), 0, nullptr);
  w = static_cast<int>(img.width);
  h = static_cast<int>(img.height);
  return px;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Minimal structural schema check: every key present with the expected JSON type.
void expect_schema(const json& j, const std::vector<std::pair<std::string, json::value_t>>& fields) {
  for (const auto& [key, type] : fields) {
    ASSERT_TRUE(j.contains(key)) << key << " missing in " << j.dump();
    const auto t = j.at(key).type();
    const bool numeric = type == json::value_t::number_float &&
                         (t == json::value_t::number_integer || t == json::value_t::number_unsigned);
    EXPECT_TRUE(t == type || numeric) << key << " has type " << j.at(key).type_name();
  }
}

TEST(Cli, ScoreFourTilesAndHeatmap) {
  const auto dir = scratch_dir();
  save_png(testing::random_image_8bit(64, 64, 1), dir / "in.png");
  const CliRun r = invoke("score " + q(dir / "in.png") + " --patch 32 --heatmap " + q(dir / "h.png"));
  ASSERT_EQ(r.exit_code, 0);
  const json j = json::parse(r.out);
  ASSERT_EQ(j.size(), 4u);
  for (const auto& rec : j)
    expect_schema(rec, {{"index", json::value_t::number_unsigned},
                        {"colorfulness", json::value_t::number_float},
                        {"frequency_mean", json::value_t::number_float},
                        {"score", json::value_t::number_float}});
  int w = 0, h = 0;
  const auto heat = read_gray(dir / "h.png", w, h);
  EXPECT_EQ(w, 64);
  EXPECT_EQ(h, 64);
  EXPECT_EQ(*std::max_element(heat.begin(), heat.end()), 255);
  EXPECT_EQ(*std::min_element(heat.begin(), heat.end()), 0);
}

TEST(Cli, ConstantImageScoresZeroWithBlackHeatmap) {
  const auto dir = scratch_dir();
  save_png(Image(32, 32, 0.4), dir / "flat.png");
  const CliRun r = invoke("score " + q(dir / "flat.png") + " --patch 16 --heatmap " + q(dir / "h.png"));
  ASSERT_EQ(r.exit_code, 0);
  for (const auto& rec : json::parse(r.out)) EXPECT_EQ(rec.at("score").get<double>(), 0.0);
  int w = 0, h = 0;
  const auto heat = read_gray(dir / "h.png", w, h);
  ASSERT_EQ(heat.size(), 32u * 32u);
  for (auto v : heat) EXPECT_EQ(v, 0);
}

TEST(Cli, MetricsIdenticalAndMismatch) {
  const auto dir = scratch_dir();
  save_png(testing::random_image_8bit(20, 20, 2), dir / "a.png");
  save_png(testing::random_image_8bit(20, 21, 3), dir / "b.png");
  const CliRun same = invoke("metrics " + q(dir / "a.png") + " " + q(dir / "a.png"));
  ASSERT_EQ(same.exit_code, 0);
  const json j = json::parse(same.out);
  EXPECT_EQ(j.at("psnr_db"), "inf");
  EXPECT_EQ(j.at("ssim").get<double>(), 1.0);
  EXPECT_EQ(j.at("delta_e").get<double>(), 0.0);
  EXPECT_EQ(invoke("metrics " + q(dir / "a.png") + " " + q(dir / "b.png")).exit_code, 1);
  EXPECT_EQ(invoke("metrics " + q(dir / "a.png") + " " + q(dir / "nope.png")).exit_code, 1);
}

TEST(Cli, GenIsReproducible) {
  const auto dir = scratch_dir();
  ASSERT_EQ(invoke("gen " + q(dir / "a") + " --n 6 --seed 9 --patch 32").exit_code, 0);
  ASSERT_EQ(invoke("gen " + q(dir / "b") + " --n 6 --seed 9 --patch 32").exit_code, 0);
  EXPECT_EQ(slurp(dir / "a" / "manifest.json"), slurp(dir / "b" / "manifest.json"));
  EXPECT_EQ(slurp(dir / "a" / "pair_00005_moire.png"), slurp(dir / "b" / "pair_00005_moire.png"));
}

TEST(Cli, TrainInferRouteBenchEval) {
  const auto dir = scratch_dir();
  ASSERT_EQ(invoke("gen " + q(dir / "d") + " --n 12 --seed 1 --patch 16").exit_code, 0);
  const auto weights = dir / "w.ddaw";

  const CliRun zero = invoke("train " + q(dir / "d" / "manifest.json") + " --out " + q(weights) +
                       " --epochs 0 --channels 8 --layers 3 --seed 4");
  ASSERT_EQ(zero.exit_code, 0);
  EXPECT_EQ(load_weights(weights), init_weights(SupernetSpec{3, 8, 3, true}, 4));

  const CliRun tr = invoke("train " + q(dir / "d" / "manifest.json") + " --out " + q(weights) +
                     " --epochs 2 --channels 8 --layers 3 --lr 1e-3 --threads 2");
  ASSERT_EQ(tr.exit_code, 0);
  std::istringstream lines(tr.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    expect_schema(json::parse(line), {{"epoch", json::value_t::number_unsigned},
                                      {"width", json::value_t::number_float},
                                      {"mean_loss", json::value_t::number_float}});
    ++count;
  }
  EXPECT_EQ(count, 6);
  ASSERT_TRUE(std::filesystem::exists(weights.string() + ".thresholds.json"));
  EXPECT_TRUE(zero.out.empty());

  const auto again = dir / "again.ddaw";
  ASSERT_EQ(invoke("train " + q(dir / "d" / "manifest.json") + " --out " + q(again) +
                   " --epochs 2 --channels 8 --layers 3 --lr 1e-3 --threads 1").exit_code,
            0);
  EXPECT_EQ(slurp(weights), slurp(again));

  save_png(testing::random_image_8bit(48, 40, 5), dir / "img.png");
  const std::string common = q(dir / "img.png") + " --weights " + q(weights) + " --patch 16";
  const CliRun full = invoke("infer " + common + " --full --out " + q(dir / "full.png"));
  const CliRun same = invoke("infer " + common + " --widths 1.0,1.0,1.0 --out " + q(dir / "same.png"));
  const CliRun dda = invoke("infer " + common + " --out " + q(dir / "dda.png"));
  ASSERT_EQ(full.exit_code, 0);
  ASSERT_EQ(same.exit_code, 0);
  ASSERT_EQ(dda.exit_code, 0);
  EXPECT_EQ(slurp(dir / "full.png"), slurp(dir / "same.png"));
  const json rep = json::parse(dda.out);
  expect_schema(rep, {{"per_group", json::value_t::array},
                      {"total_dda", json::value_t::number_unsigned},
                      {"total_baseline", json::value_t::number_unsigned},
                      {"reduction_fraction", json::value_t::number_float}});
  EXPECT_GT(rep.at("reduction_fraction").get<double>(), 0.0);
  EXPECT_EQ(json::parse(full.out).at("reduction_fraction").get<double>(), 0.0);

  const CliRun thr = invoke("infer " + common + " --policy threshold --out " + q(dir / "t.png"));
  EXPECT_EQ(thr.exit_code, 0);

  const CliRun route = invoke("route " + q(dir / "img.png") + " --patch 16");
  ASSERT_EQ(route.exit_code, 0);
  const json rj = json::parse(route.out);
  ASSERT_EQ(rj.size(), 9u);
  expect_schema(rj[0], {{"patch_index", json::value_t::number_unsigned},
                        {"score", json::value_t::number_float},
                        {"group", json::value_t::number_unsigned},
                        {"width", json::value_t::number_float}});

  // Totals follow from each tile's true size and the width route assigned it.
  const SupernetSpec spec{3, 8, 3, true};
  const PatchGrid grid = split(load_png(dir / "img.png"), 16, 16);
  std::uint64_t expect_dda = 0, expect_base = 0;
  for (const auto& p : rj) {
    const PatchEntry& e = grid.entries[p.at("patch_index").get<std::size_t>()];
    expect_dda += flops(spec, p.at("width").get<double>(), e.height, e.width);
    expect_base += flops(spec, 1.0, e.height, e.width);
  }
  EXPECT_EQ(rep.at("total_dda").get<std::uint64_t>(), expect_dda);
  EXPECT_EQ(rep.at("total_baseline").get<std::uint64_t>(), expect_base);

  const CliRun bench = invoke("bench " + common + " --repetitions 1");
  ASSERT_EQ(bench.exit_code, 0);
  const json bj = json::parse(bench.out);
  EXPECT_EQ(bj.at("repetitions"), 1);
  for (const char* path : {"full", "dda"}) {
    const double median = bj.at(path).at("median_s"), min = bj.at(path).at("min_s");
    EXPECT_EQ(median, min);
    EXPECT_GT(median, 0.0);
    EXPECT_TRUE(std::isfinite(median));
  }
  EXPECT_LT(bj.at("dda").at("flops").at("total_dda").get<std::uint64_t>(),
            bj.at("full").at("flops").at("total_dda").get<std::uint64_t>());
  EXPECT_EQ(invoke("bench " + common + " --repetitions 0").exit_code, 1);

  const CliRun ev = invoke("eval " + q(dir / "d" / "manifest.json") + " --weights " + q(weights) + " --patch 16");
  ASSERT_EQ(ev.exit_code, 0);
  EXPECT_EQ(json::parse(ev.out).at("per_image").size(), 12u);
}

TEST(Cli, ConfigValidationFailsFast) {
  const auto dir = scratch_dir();
  save_png(Image(16, 16, 0.2), dir / "a.png");
  EXPECT_EQ(invoke("route " + q(dir / "a.png") + " --groups 2").exit_code, 1);
  EXPECT_EQ(invoke("route " + q(dir / "a.png") + " --widths 0.5,0.25").exit_code, 1);
  EXPECT_EQ(invoke("score " + q(dir / "a.png") + " --patch 0").exit_code, 1);
  EXPECT_EQ(invoke("score " + q(dir / "a.png") + " --sigma -1").exit_code, 1);
  EXPECT_EQ(invoke("route " + q(dir / "a.png") + " --policy nearest").exit_code, 1);
  EXPECT_EQ(invoke("frobnicate").exit_code, 1);
  EXPECT_EQ(invoke("infer " + q(dir / "a.png") + " --weights " + q(dir / "none.ddaw") + " --out " +
                q(dir / "o.png")).exit_code,
            1);
}

} // namespace
} // namespace dda
