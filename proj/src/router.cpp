// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/router.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dda/error.hpp"

namespace dda {

std::vector<std::size_t> GroupAssignment::group_sizes() const {
  std::vector<std::size_t> sizes(num_groups, 0);
  for (int g : group_of) ++sizes[g];
  return sizes;
}

std::vector<std::size_t> GroupAssignment::members(int group) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < group_of.size(); ++i)
    if (group_of[i] == group) out.push_back(i);
  return out;
}

void validate_widths(std::span<const double> widths, bool strict) {
  if (widths.empty()) throw InvalidArgument("width list is empty");
  for (std::size_t g = 0; g < widths.size(); ++g) {
    if (!(widths[g] > 0.0 && widths[g] <= 1.0))
      throw InvalidArgument("width " + std::to_string(widths[g]) + " outside (0,1]");
    if (g > 0) {
      const bool ok = strict ? widths[g] > widths[g - 1] : widths[g] >= widths[g - 1];
      if (!ok)
        throw InvalidArgument(strict ? "width list must be strictly increasing"
                                     : "width list must be non-decreasing");
    }
  }
}

std::vector<int> rank_ascending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<int> rank(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);
  return rank;
}

int group_for_rank(int rank, std::size_t n, int num_groups) {
  const std::size_t per_group = (n + num_groups - 1) / num_groups;
  return std::min(static_cast<int>(rank / per_group), num_groups - 1);
}

namespace {

GroupAssignment assign_impl(std::span<const double> scores, std::span<const double> widths) {
  if (scores.empty()) throw InvalidArgument("score list is empty");
  GroupAssignment a;
  a.num_groups = static_cast<int>(widths.size());
  a.widths.assign(widths.begin(), widths.end());
  a.rank_of = rank_ascending(scores);
  a.group_of.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    a.group_of[i] = group_for_rank(a.rank_of[i], scores.size(), a.num_groups);
  return a;
}

} // namespace

GroupAssignment assign_groups(std::span<const double> scores, std::span<const double> widths) {
  validate_widths(widths, /*strict=*/true);
  return assign_impl(scores, widths);
}

GroupAssignment assign_groups_relaxed(std::span<const double> scores,
                                      std::span<const double> widths) {
  validate_widths(widths, /*strict=*/false);
  return assign_impl(scores, widths);
}

Thresholds dataset_thresholds(std::span<const double> scores, int num_groups) {
  if (num_groups < 1) throw InvalidArgument("group count must be >= 1");
  if (scores.size() < static_cast<std::size_t>(num_groups))
    throw InvalidArgument("need at least " + std::to_string(num_groups) + " scores, got " +
                          std::to_string(scores.size()));
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  Thresholds t;
  const double last = static_cast<double>(sorted.size() - 1);
  for (int k = 1; k < num_groups; ++k) {
    const double pos = last * k / num_groups;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    t.cutpoints.push_back(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
  }
  return t;
}

int classify_by_threshold(double score, const Thresholds& thresholds) {
  const auto& c = thresholds.cutpoints;
  for (std::size_t g = 0; g < c.size(); ++g)
    if (score <= c[g]) return static_cast<int>(g);
  return static_cast<int>(c.size());
}

GroupAssignment assign_by_thresholds(std::span<const double> scores, const Thresholds& thresholds,
                                     std::span<const double> widths) {
  validate_widths(widths, /*strict=*/false);
  if (thresholds.num_groups() != static_cast<int>(widths.size()))
    throw InvalidArgument("threshold count does not match width list");
  if (!std::is_sorted(thresholds.cutpoints.begin(), thresholds.cutpoints.end()))
    throw InvalidArgument("threshold cutpoints must be ascending");
  if (scores.empty()) throw InvalidArgument("score list is empty");
  GroupAssignment a;
  a.num_groups = static_cast<int>(widths.size());
  a.widths.assign(widths.begin(), widths.end());
  a.rank_of = rank_ascending(scores);
  a.group_of.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    a.group_of[i] = classify_by_threshold(scores[i], thresholds);
  return a;
}

} // namespace dda
