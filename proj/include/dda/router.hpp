// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dda {

/// Patch -> complexity group -> subnet width. Group 0 is the lowest-complexity
/// group and runs the narrowest subnet.
struct GroupAssignment {
  int num_groups = 0;
  std::vector<int> group_of;     // by patch index
  std::vector<int> rank_of;      // ascending-score rank, stable by index
  std::vector<double> widths;    // by group id

  std::size_t patch_count() const { return group_of.size(); }
  std::vector<std::size_t> group_sizes() const;
  std::vector<std::size_t> members(int group) const;
  double width_of(std::size_t patch) const { return widths[group_of[patch]]; }
};

/// Ascending cut points between M consecutive score classes.
struct Thresholds {
  std::vector<double> cutpoints;  // M - 1 values, ascending

  int num_groups() const { return static_cast<int>(cutpoints.size()) + 1; }
};

/// Ascending ranks; ties broken by ascending index.
std::vector<int> rank_ascending(std::span<const double> scores);

/// Leading groups hold ceil(N/M) ranks each, the last group takes the rest.
int group_for_rank(int rank, std::size_t n, int num_groups);

/// Per-image equal-count grouping. widths must be strictly increasing in (0,1].
GroupAssignment assign_groups(std::span<const double> scores, std::span<const double> widths);

/// Same rank formula with a width list that may repeat values (non-decreasing),
/// used when every group intentionally runs the same width.
GroupAssignment assign_groups_relaxed(std::span<const double> scores,
                                      std::span<const double> widths);

/// Linear-interpolation empirical quantiles at k/M, k = 1..M-1.
Thresholds dataset_thresholds(std::span<const double> scores, int num_groups);

/// Smallest g with score <= cutpoints[g], else M - 1.
int classify_by_threshold(double score, const Thresholds& thresholds);

GroupAssignment assign_by_thresholds(std::span<const double> scores, const Thresholds& thresholds,
                                     std::span<const double> widths);

void validate_widths(std::span<const double> widths, bool strict);

} // namespace dda
