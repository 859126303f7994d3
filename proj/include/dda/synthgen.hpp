// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dda/image.hpp"
#include "dda/moire_prior.hpp"

namespace dda {

enum class Coverage { kFull, kHalf, kBlob };

/// Two-grating interference model:
///   amplitude * cos(2*pi*f1*(x cos t1 + y sin t1) + phase[c])
///             * cos(2*pi*f2*(x cos t2 + y sin t2))
/// added per channel inside the coverage mask.
struct MoireParams {
  double freq1 = 0.3;  // cycles / pixel, in (0, 0.5]
  double freq2 = 0.27;
  double theta1 = 0.3;  // radians
  double theta2 = 0.5;
  double amplitude = 0.2;  // [0, 0.5]
  std::array<double, 3> phase = {0.0, 2.1, 4.2};
  Coverage coverage = Coverage::kFull;
  std::uint64_t blob_seed = 0;

  void validate() const;
};

std::string to_string(Coverage c);
Coverage coverage_from_string(const std::string& s);

/// splitmix64 mix of (seed, index); per-item seeds for parallel generation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Smooth gradient + low-frequency texture + a few flat-colour regions.
Image gen_clean(std::uint64_t seed, int height, int width);

/// Coverage mask (1 = moire applied) for the given params and dims.
std::vector<std::uint8_t> coverage_mask(const MoireParams& params, int height, int width);

Image overlay_moire(const Image& clean, const MoireParams& params);

/// Random params with amplitude drawn from [min_amplitude, max_amplitude].
MoireParams random_moire_params(std::mt19937_64& rng, double min_amplitude = 0.1,
                                double max_amplitude = 0.35);

struct ManifestEntry {
  std::string clean_path;  // relative to the manifest directory
  std::string moire_path;
  MoireParams params;
  double score = 0.0;  // moire score of the moire patch
};

struct GenOptions {
  int patch_height = 64;
  int patch_width = 64;
  double moire_free_rate = 0.2;
  PriorConfig prior;
};

/// Writes clean/moire PNG pairs plus manifest.json into out_dir and returns
/// the manifest path.
std::filesystem::path gen_dataset(int n_pairs, std::uint64_t seed,
                                  const std::filesystem::path& out_dir,
                                  const GenOptions& options = {});

/// Entry i of a generated dataset, without touching the filesystem.
struct GeneratedPair {
  Image clean;
  Image moire;
  MoireParams params;
};
GeneratedPair gen_pair(std::uint64_t seed, std::uint64_t index, const GenOptions& options);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& manifest_path);

} // namespace dda
