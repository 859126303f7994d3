// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "dda/error.hpp"
#include "dda/png_io.hpp"

namespace dda {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

Image quantize8(const Image& img) {
  Image out = img;
  for (double& v : out.data()) v = quantize_sample(v) / 255.0;
  return out;
}

} // namespace

void MoireParams::validate() const {
  if (!(freq1 > 0.0 && freq1 <= 0.5) || !(freq2 > 0.0 && freq2 <= 0.5))
    throw InvalidArgument("moire frequencies must lie in (0, 0.5]");
  if (!(amplitude >= 0.0 && amplitude <= 0.5))
    throw InvalidArgument("moire amplitude must lie in [0, 0.5]");
}

std::string to_string(Coverage c) {
  switch (c) {
    case Coverage::kFull: return "full";
    case Coverage::kHalf: return "half";
    case Coverage::kBlob: return "blob";
  }
  return "full";
}

Coverage coverage_from_string(const std::string& s) {
  if (s == "full") return Coverage::kFull;
  if (s == "half") return Coverage::kHalf;
  if (s == "blob") return Coverage::kBlob;
  throw InvalidArgument("unknown coverage '" + s + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Image gen_clean(std::uint64_t seed, int height, int width) {
  if (height < 1 || width < 1) throw InvalidArgument("gen_clean dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  Image img(height, width);

  // Linear gradient between two colours.
  std::array<double, 3> c0, c1;
  for (int c = 0; c < 3; ++c) {
    c0[c] = uniform(rng, 0.1, 0.9);
    c1[c] = uniform(rng, 0.1, 0.9);
  }
  const double dir = uniform(rng, 0.0, kTwoPi);
  const double dx = std::cos(dir), dy = std::sin(dir);
  const double span = std::abs(dx) * width + std::abs(dy) * height;
  const double offset = std::min(0.0, dx * width) + std::min(0.0, dy * height);

  // Low-frequency texture: two slow waves with per-channel weights.
  struct Wave {
    double fx, fy, phase;
    std::array<double, 3> amp;
  };
  std::array<Wave, 2> waves;
  for (auto& w : waves) {
    const double f = uniform(rng, 0.004, 0.03);
    const double a = uniform(rng, 0.0, kTwoPi);
    w.fx = f * std::cos(a);
    w.fy = f * std::sin(a);
    w.phase = uniform(rng, 0.0, kTwoPi);
    for (double& amp : w.amp) amp = uniform(rng, 0.0, 0.06);
  }

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = span > 0.0 ? ((dx * x + dy * y) - offset) / span : 0.0;
      for (int c = 0; c < 3; ++c) {
        double v = c0[c] + (c1[c] - c0[c]) * t;
        for (const auto& w : waves) v += w.amp[c] * std::sin(kTwoPi * (w.fx * x + w.fy * y) + w.phase);
        img.at(y, x, c) = v;
      }
    }
  }

  // Flat regions: axis-aligned rectangles or discs of a single colour.
  const int regions = static_cast<int>(rng() % 4);
  for (int r = 0; r < regions; ++r) {
    std::array<double, 3> color;
    for (double& v : color) v = uniform(rng, 0.05, 0.95);
    const double cy = uniform(rng, 0.0, height), cx = uniform(rng, 0.0, width);
    const double ry = uniform(rng, 0.1, 0.3) * height, rx = uniform(rng, 0.1, 0.3) * width;
    const bool disc = (rng() & 1u) != 0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double ny = (y - cy) / std::max(ry, 0.5), nx = (x - cx) / std::max(rx, 0.5);
        const bool inside = disc ? nx * nx + ny * ny <= 1.0 : std::abs(nx) <= 1.0 && std::abs(ny) <= 1.0;
        if (inside)
          for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
      }
    }
  }

  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

std::vector<std::uint8_t> coverage_mask(const MoireParams& params, int height, int width) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(height) * width, 0);
  switch (params.coverage) {
    case Coverage::kFull:
      std::fill(mask.begin(), mask.end(), 1);
      break;
    case Coverage::kHalf:
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width / 2; ++x) mask[static_cast<std::size_t>(y) * width + x] = 1;
      break;
    case Coverage::kBlob: {
      std::mt19937_64 rng(params.blob_seed);
      const double cy = uniform(rng, 0.2, 0.8) * height, cx = uniform(rng, 0.2, 0.8) * width;
      const double ry = uniform(rng, 0.25, 0.5) * height, rx = uniform(rng, 0.25, 0.5) * width;
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const double ny = (y - cy) / ry, nx = (x - cx) / rx;
          if (nx * nx + ny * ny <= 1.0) mask[static_cast<std::size_t>(y) * width + x] = 1;
        }
      break;
    }
  }
  return mask;
}

Image overlay_moire(const Image& clean, const MoireParams& params) {
  params.validate();
  if (params.amplitude == 0.0) return clean;
  const int h = clean.height(), w = clean.width();
  const auto mask = coverage_mask(params, h, w);
  const double c1 = std::cos(params.theta1), s1 = std::sin(params.theta1);
  const double c2 = std::cos(params.theta2), s2 = std::sin(params.theta2);
  Image out = clean;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask[static_cast<std::size_t>(y) * w + x]) continue;
      const double arg1 = kTwoPi * params.freq1 * (x * c1 + y * s1);
      const double carrier = std::cos(kTwoPi * params.freq2 * (x * c2 + y * s2));
      for (int c = 0; c < 3; ++c) {
        const double v = clean.at(y, x, c) +
                         params.amplitude * std::cos(arg1 + params.phase[c]) * carrier;
        out.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

MoireParams random_moire_params(std::mt19937_64& rng, double min_amplitude,
                                double max_amplitude) {
  MoireParams p;
  p.freq1 = uniform(rng, 0.15, 0.45);
  p.freq2 = uniform(rng, 0.15, 0.45);
  p.theta1 = uniform(rng, 0.0, std::numbers::pi);
  p.theta2 = p.theta1 + uniform(rng, -0.5, 0.5);
  p.amplitude = uniform(rng, min_amplitude, max_amplitude);
  for (double& ph : p.phase) ph = uniform(rng, 0.0, kTwoPi);
  const double pick = uniform(rng, 0.0, 1.0);
  p.coverage = pick < 0.7 ? Coverage::kFull : (pick < 0.85 ? Coverage::kHalf : Coverage::kBlob);
  p.blob_seed = rng();
  return p;
}

GeneratedPair gen_pair(std::uint64_t seed, std::uint64_t index, const GenOptions& options) {
  if (!(options.moire_free_rate >= 0.0 && options.moire_free_rate <= 1.0))
    throw InvalidArgument("moire-free rate must lie in [0, 1]");
  const std::uint64_t item_seed = derive_seed(seed, index);
  std::mt19937_64 rng(item_seed);
  const bool moire_free = uniform(rng, 0.0, 1.0) < options.moire_free_rate;
  GeneratedPair pair;
  pair.params = random_moire_params(rng);
  if (moire_free) pair.params.amplitude = 0.0;
  // PNG round trip is lossless on 8-bit data, so quantize up front.
  pair.clean = quantize8(gen_clean(derive_seed(item_seed, 1), options.patch_height,
                                   options.patch_width));
  pair.moire = quantize8(overlay_moire(pair.clean, pair.params));
  return pair;
}

namespace {

nlohmann::json params_to_json(const MoireParams& p) {
  return {{"freq1", p.freq1},         {"freq2", p.freq2},
          {"theta1", p.theta1},       {"theta2", p.theta2},
          {"amplitude", p.amplitude}, {"phase", p.phase},
          {"coverage", to_string(p.coverage)}, {"blob_seed", p.blob_seed}};
}

MoireParams params_from_json(const nlohmann::json& j) {
  MoireParams p;
  p.freq1 = j.at("freq1").get<double>();
  p.freq2 = j.at("freq2").get<double>();
  p.theta1 = j.at("theta1").get<double>();
  p.theta2 = j.at("theta2").get<double>();
  p.amplitude = j.at("amplitude").get<double>();
  p.phase = j.at("phase").get<std::array<double, 3>>();
  p.coverage = coverage_from_string(j.at("coverage").get<std::string>());
  p.blob_seed = j.at("blob_seed").get<std::uint64_t>();
  return p;
}

} // namespace

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& manifest_path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    arr.push_back({{"clean_path", e.clean_path},
                   {"moire_path", e.moire_path},
                   {"params", params_to_json(e.params)},
                   {"score", e.score}});
  }
  std::ofstream out(manifest_path);
  if (!out) throw IoError("cannot write manifest " + manifest_path.string());
  out << arr.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest " + manifest_path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path.string());
  nlohmann::json arr;
  try {
    in >> arr;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
  }
  if (!arr.is_array()) throw IoError("manifest must be a JSON array");
  std::vector<ManifestEntry> entries;
  try {
    for (const auto& j : arr) {
      ManifestEntry e;
      e.clean_path = j.at("clean_path").get<std::string>();
      e.moire_path = j.at("moire_path").get<std::string>();
      e.params = params_from_json(j.at("params"));
      e.score = j.at("score").get<double>();
      entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest entry: " + std::string(e.what()));
  }
  return entries;
}

std::filesystem::path gen_dataset(int n_pairs, std::uint64_t seed,
                                  const std::filesystem::path& out_dir,
                                  const GenOptions& options) {
  if (n_pairs < 0) throw InvalidArgument("pair count must be >= 0");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<ManifestEntry> entries(n_pairs);
  std::vector<std::string> failures(n_pairs);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_pairs; ++i) {
    try {
      const GeneratedPair pair = gen_pair(seed, static_cast<std::uint64_t>(i), options);
      char stem[32];
      std::snprintf(stem, sizeof(stem), "pair_%05d", i);
      ManifestEntry& e = entries[i];
      e.clean_path = std::string(stem) + "_clean.png";
      e.moire_path = std::string(stem) + "_moire.png";
      e.params = pair.params;
      e.score = moire_score(pair.moire, options.prior).score;
      save_png(pair.clean, out_dir / e.clean_path);
      save_png(pair.moire, out_dir / e.moire_path);
    } catch (const std::exception& ex) {
      failures[i] = ex.what();
    }
  }
  for (const auto& f : failures)
    if (!f.empty()) throw IoError(f);
  const auto manifest = out_dir / "manifest.json";
  write_manifest(entries, manifest);
  return manifest;
}

} // namespace dda
