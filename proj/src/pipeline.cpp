// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/pipeline.hpp"

#include <algorithm>

#include "dda/error.hpp"
#include "dda/parallel.hpp"

namespace dda {

std::string to_string(GroupingPolicy p) {
  return p == GroupingPolicy::kPerImage ? "per-image" : "threshold";
}

GroupingPolicy grouping_policy_from_string(const std::string& s) {
  if (s == "per-image") return GroupingPolicy::kPerImage;
  if (s == "threshold") return GroupingPolicy::kThreshold;
  throw InvalidArgument("unknown grouping policy '" + s + "' (per-image | threshold)");
}

std::vector<Image> infer_patches(const Image& image, const PatchGrid& grid,
                                 const SupernetWeights& weights,
                                 const std::vector<double>& patch_widths) {
  if (patch_widths.size() != grid.size())
    throw DimensionMismatch("one width per patch required");
  std::vector<Image> outputs(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  auto run = [&](std::ptrdiff_t i) {
    const Image patch = extract(image, grid, static_cast<std::size_t>(i));
    outputs[i] = forward(SubnetView(weights, patch_widths[i]), patch);
  };
  if (n >= thread_count()) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) run(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) run(i);
  }
  return outputs;
}

FlopsReport flops_report(const SupernetSpec& spec, const PatchGrid& grid,
                         const GroupAssignment& assignment) {
  FlopsReport r;
  for (int g = 0; g < assignment.num_groups; ++g)
    r.per_group.push_back({g, assignment.widths[g], 0, 0});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PatchEntry& e = grid.entries[i];
    GroupFlops& gf = r.per_group[assignment.group_of[i]];
    ++gf.patches;
    gf.flops += flops(spec, gf.width, e.height, e.width);
    r.total_baseline += flops(spec, 1.0, e.height, e.width);
  }
  for (const auto& gf : r.per_group) r.total_dda += gf.flops;
  r.reduction_fraction =
      r.total_baseline == 0
          ? 0.0
          : 1.0 - static_cast<double>(r.total_dda) / static_cast<double>(r.total_baseline);
  return r;
}

FullResult demoire_full(const Image& image, const SupernetWeights& weights, int patch_height,
                        int patch_width) {
  const PatchGrid grid = split(image, patch_height, patch_width);
  GroupAssignment all_full;
  all_full.num_groups = 1;
  all_full.widths = {1.0};
  all_full.group_of.assign(grid.size(), 0);
  all_full.rank_of.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) all_full.rank_of[i] = static_cast<int>(i);

  const auto outputs = infer_patches(image, grid, weights, std::vector<double>(grid.size(), 1.0));
  return {concat(grid, outputs), flops_report(weights.spec(), grid, all_full)};
}

DdaResult demoire_dda(const Image& image, const SupernetWeights& weights, const DdaConfig& config) {
  DdaResult r;
  r.grid = split(image, config.patch_height, config.patch_width);
  if (r.grid.size() == 0) throw InvalidArgument("cannot run the pipeline on an empty image");
  r.scores = score_grid(image, r.grid, config.prior);
  std::vector<double> values;
  for (const auto& s : r.scores) values.push_back(s.score);

  if (config.policy == GroupingPolicy::kThreshold) {
    if (!config.thresholds) throw InvalidArgument("threshold policy needs thresholds");
    r.assignment = assign_by_thresholds(values, *config.thresholds, config.widths);
  } else {
    r.assignment = assign_groups_relaxed(values, config.widths);
  }

  std::vector<double> patch_widths(r.grid.size());
  for (std::size_t i = 0; i < r.grid.size(); ++i) patch_widths[i] = r.assignment.width_of(i);
  const auto outputs = infer_patches(image, r.grid, weights, patch_widths);
  r.output = concat(r.grid, outputs);
  r.report = flops_report(weights.spec(), r.grid, r.assignment);
  return r;
}

EvalReport evaluate(const std::vector<EvalPair>& pairs, const SupernetWeights& weights,
                    const DdaConfig& config) {
  if (pairs.empty()) throw InvalidArgument("evaluation set is empty");
  EvalReport report;
  for (int g = 0; g < static_cast<int>(config.widths.size()); ++g)
    report.flops.per_group.push_back({g, config.widths[g], 0, 0});

  for (const auto& pair : pairs) {
    if (pair.moire.height() != pair.clean.height() || pair.moire.width() != pair.clean.width())
      throw DimensionMismatch("evaluation pair '" + pair.file + "' differs in size");
    const DdaResult r = demoire_dda(pair.moire, weights, config);
    ImageEval e;
    e.file = pair.file;
    e.metrics = compute_metrics(r.output, pair.clean);
    e.input_metrics = compute_metrics(pair.moire, pair.clean);
    e.flops_dda = r.report.total_dda;
    e.flops_baseline = r.report.total_baseline;
    for (const auto& gf : r.report.per_group) {
      report.flops.per_group[gf.group].patches += gf.patches;
      report.flops.per_group[gf.group].flops += gf.flops;
    }
    report.flops.total_dda += e.flops_dda;
    report.flops.total_baseline += e.flops_baseline;
    report.per_image.push_back(std::move(e));
  }

  const double n = static_cast<double>(report.per_image.size());
  for (const auto& e : report.per_image) {
    report.mean_psnr_db += e.metrics.psnr_db;
    report.mean_ssim += e.metrics.ssim;
    report.mean_delta_e += e.metrics.delta_e;
    report.mean_input_psnr_db += e.input_metrics.psnr_db;
  }
  report.mean_psnr_db /= n;
  report.mean_ssim /= n;
  report.mean_delta_e /= n;
  report.mean_input_psnr_db /= n;
  report.flops.reduction_fraction =
      1.0 - static_cast<double>(report.flops.total_dda) /
                static_cast<double>(report.flops.total_baseline);
  report.reduction_fraction = report.flops.reduction_fraction;
  return report;
}

} // namespace dda
