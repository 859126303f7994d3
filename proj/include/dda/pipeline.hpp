// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dda/image.hpp"
#include "dda/metrics.hpp"
#include "dda/moire_prior.hpp"
#include "dda/router.hpp"
#include "dda/supernet.hpp"

namespace dda {

enum class GroupingPolicy {
  kPerImage,   // equal-count rank split within each image
  kThreshold,  // dataset-wide score cut points
};

std::string to_string(GroupingPolicy p);
GroupingPolicy grouping_policy_from_string(const std::string& s);

struct DdaConfig {
  std::vector<double> widths = {0.25, 0.5, 0.75};
  int patch_height = 512;
  int patch_width = 512;
  PriorConfig prior;
  GroupingPolicy policy = GroupingPolicy::kPerImage;
  std::optional<Thresholds> thresholds;  // required by kThreshold
};

struct GroupFlops {
  int group = 0;
  double width = 0.0;
  std::size_t patches = 0;
  std::uint64_t flops = 0;
};

struct FlopsReport {
  std::vector<GroupFlops> per_group;
  std::uint64_t total_dda = 0;
  std::uint64_t total_baseline = 0;  // every patch at width 1.0
  double reduction_fraction = 0.0;   // 1 - total_dda / total_baseline
};

struct DdaResult {
  Image output;
  FlopsReport report;
  GroupAssignment assignment;
  PatchGrid grid;
  std::vector<MoireScore> scores;
};

struct FullResult {
  Image output;
  FlopsReport report;
};

/// Baseline path: the same tiles, every one at width 1.0.
FullResult demoire_full(const Image& image, const SupernetWeights& weights, int patch_height,
                        int patch_width);

/// score -> route -> per-group subnet inference -> hard concatenation.
DdaResult demoire_dda(const Image& image, const SupernetWeights& weights, const DdaConfig& config);

/// Runs each patch of the grid at the width given by `patch_widths` (index
/// aligned). Patches are spread across threads when there are enough of them,
/// otherwise each patch's convolutions use the threads.
std::vector<Image> infer_patches(const Image& image, const PatchGrid& grid,
                                 const SupernetWeights& weights,
                                 const std::vector<double>& patch_widths);

/// Sum of per-patch FLOPs at each patch's true tile size.
FlopsReport flops_report(const SupernetSpec& spec, const PatchGrid& grid,
                         const GroupAssignment& assignment);

struct EvalPair {
  std::string file;
  Image moire;
  Image clean;
};

struct ImageEval {
  std::string file;
  MetricResult metrics;        // restored vs clean
  MetricResult input_metrics;  // moire input vs clean
  std::uint64_t flops_dda = 0;
  std::uint64_t flops_baseline = 0;
};

struct EvalReport {
  std::vector<ImageEval> per_image;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;
  double mean_delta_e = 0.0;
  double mean_input_psnr_db = 0.0;
  double reduction_fraction = 0.0;
  FlopsReport flops;  // aggregated over all images
};

EvalReport evaluate(const std::vector<EvalPair>& pairs, const SupernetWeights& weights,
                    const DdaConfig& config);

} // namespace dda
