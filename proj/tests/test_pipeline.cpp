// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include <gtest/gtest.h>

#include "dda/error.hpp"
#include "dda/pipeline.hpp"
#include "dda/synthgen.hpp"
#include "test_util.hpp"

namespace dda {
namespace {

using testing::random_image;

DdaConfig config(int patch) {
  DdaConfig c;
  c.patch_height = c.patch_width = patch;
  return c;
}

TEST(Pipeline, ZeroWeightsAreIdentityAtEveryWidth) {
  const SupernetWeights w(SupernetSpec{3, 8, 3, true});
  const Image img = random_image(40, 30, 1);
  EXPECT_EQ(demoire_full(img, w, 16, 16).output, img);
  EXPECT_EQ(demoire_dda(img, w, config(16)).output, img);
}

TEST(Pipeline, EqualWidthsReproduceFullBitExactly) {
  const SupernetWeights w = init_weights(SupernetSpec{4, 8, 3, true}, 3);
  const Image img = random_image(45, 38, 2);
  DdaConfig c = config(16);
  c.widths = {1.0, 1.0, 1.0};
  const DdaResult dda = demoire_dda(img, w, c);
  const FullResult full = demoire_full(img, w, 16, 16);
  EXPECT_EQ(dda.output, full.output);
  EXPECT_EQ(dda.report.total_dda, full.report.total_dda);
  EXPECT_EQ(dda.report.reduction_fraction, 0.0);
}

TEST(Pipeline, FourTilesGroupSizes) {
  const SupernetWeights w(SupernetSpec{2, 4, 3, true});
  Image img(1024, 1024, 0.5);
  // Make the tiles differ so the ranking is not all ties.
  const Image noise = random_image(512, 512, 3);
  for (int r = 0; r < 512; ++r)
    for (int c = 0; c < 512; ++c)
      for (int ch = 0; ch < 3; ++ch) img.at(512 + r, 512 + c, ch) = noise.at(r, c, ch);
  const DdaResult r = demoire_dda(img, w, config(512));
  // ceil(4/3) = 2 ranks per leading group leaves the last group empty.
  EXPECT_EQ(r.assignment.group_sizes(), (std::vector<std::size_t>{2, 2, 0}));
  EXPECT_EQ(r.assignment.group_of[3], 1);
  EXPECT_EQ(r.report.per_group[2].patches, 0u);
  EXPECT_EQ(r.report.per_group[2].flops, 0u);
}

TEST(Pipeline, EveryPatchInExactlyOneGroup) {
  const SupernetWeights w(SupernetSpec{2, 4, 3, true});
  const Image img = random_image(70, 45, 4);
  const DdaResult r = demoire_dda(img, w, config(16));
  std::multiset<std::size_t> seen;
  for (int g = 0; g < r.assignment.num_groups; ++g)
    for (auto i : r.assignment.members(g)) seen.insert(i);
  ASSERT_EQ(seen.size(), r.grid.size());
  for (std::size_t i = 0; i < r.grid.size(); ++i) EXPECT_EQ(seen.count(i), 1u);
}

TEST(Pipeline, FlopsMatchAnalyticSumIncludingRemainderTiles) {
  const SupernetSpec spec{6, 32, 3, true};
  const SupernetWeights w(spec);
  const Image img = random_image(70, 45, 5);
  const DdaResult r = demoire_dda(img, w, config(32));
  std::uint64_t dda = 0, base = 0;
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const PatchEntry& e = r.grid.entries[i];
    dda += flops(spec, r.assignment.width_of(i), e.height, e.width);
    base += flops(spec, 1.0, e.height, e.width);
  }
  EXPECT_EQ(r.report.total_dda, dda);
  EXPECT_EQ(r.report.total_baseline, base);
  EXPECT_EQ(demoire_full(img, w, 32, 32).report.total_dda, base);
  std::uint64_t per_group = 0;
  for (const auto& g : r.report.per_group) per_group += g.flops;
  EXPECT_EQ(per_group, dda);
}

TEST(Pipeline, InteriorRatioSevenTwentyFourths) {
  const SupernetSpec spec{6, 32, 3, true};
  const PatchGrid grid = split(8, 24, 8, 8);
  const GroupAssignment a = assign_groups(std::vector<double>{3, 1, 2}, std::vector<double>{0.25, 0.5, 0.75});
  std::uint64_t dda = 0, full = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto narrow = layer_flops(spec, a.width_of(i), 8, 8);
    const auto wide = layer_flops(spec, 1.0, 8, 8);
    for (int l = 1; l < 5; ++l) {
      dda += narrow[l].multiply_add;
      full += wide[l].multiply_add;
    }
  }
  EXPECT_NEAR(static_cast<double>(dda) / static_cast<double>(full), 7.0 / 24.0, 1e-9);
  const FlopsReport rep = flops_report(spec, grid, a);
  EXPECT_GT(rep.reduction_fraction, 0.6);
}

TEST(Pipeline, PropertyWiderWidthsNeverCostLess) {
  const SupernetSpec spec{6, 32, 3, true};
  const PatchGrid grid = split(50, 50, 16, 16);
  std::vector<double> scores(grid.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = static_cast<double>((i * 7) % 5);
  std::uint64_t prev = 0;
  for (const auto& widths : {std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{0.25, 0.5, 0.75},
                             std::vector<double>{0.3, 0.6, 0.9}, std::vector<double>{1.0, 1.0, 1.0}}) {
    const auto rep = flops_report(spec, grid, assign_groups_relaxed(scores, widths));
    EXPECT_GE(rep.total_dda, prev);
    prev = rep.total_dda;
  }
}

TEST(Pipeline, DeterministicAcrossRuns) {
  const SupernetWeights w = init_weights(SupernetSpec{3, 8, 3, true}, 7);
  const Image img = random_image(33, 40, 6);
  const DdaResult a = demoire_dda(img, w, config(16));
  const DdaResult b = demoire_dda(img, w, config(16));
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.assignment.group_of, b.assignment.group_of);
}

TEST(Pipeline, ThresholdPolicy) {
  const SupernetWeights w(SupernetSpec{2, 4, 3, true});
  Image img(16, 32, 0.5);
  const Image noisy = random_image(16, 16, 8);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      for (int ch = 0; ch < 3; ++ch) img.at(r, 16 + c, ch) = noisy.at(r, c, ch);
  DdaConfig c = config(16);
  c.policy = GroupingPolicy::kThreshold;
  EXPECT_THROW(demoire_dda(img, w, c), InvalidArgument);
  c.thresholds = Thresholds{{1e-9, 1e-8}};
  const DdaResult r = demoire_dda(img, w, c);
  EXPECT_EQ(r.assignment.group_of, (std::vector<int>{0, 2}));
  EXPECT_EQ(grouping_policy_from_string(to_string(GroupingPolicy::kThreshold)), GroupingPolicy::kThreshold);
  EXPECT_THROW(grouping_policy_from_string("global"), InvalidArgument);
}

TEST(Evaluate, IdentityNetworkAndAveraging) {
  const SupernetWeights w(SupernetSpec{2, 4, 3, true});
  const Image a = random_image(20, 20, 1), b = random_image(20, 20, 2);
  Image a_shift = a;
  for (double& v : a_shift.data()) v = std::min(1.0, v + 0.05);
  const EvalReport r = evaluate({{"x", a_shift, a}, {"y", b, b}}, w, config(10));
  ASSERT_EQ(r.per_image.size(), 2u);
  EXPECT_TRUE(std::isinf(r.per_image[1].metrics.psnr_db));
  EXPECT_EQ(r.per_image[1].metrics.ssim, 1.0);
  EXPECT_DOUBLE_EQ(r.per_image[0].metrics.psnr_db, psnr(a_shift, a));
  EXPECT_DOUBLE_EQ(r.mean_ssim, 0.5 * (r.per_image[0].metrics.ssim + 1.0));
  EXPECT_DOUBLE_EQ(r.mean_delta_e, 0.5 * r.per_image[0].metrics.delta_e);
  EXPECT_GT(r.reduction_fraction, 0.0);
  EXPECT_THROW(evaluate({}, w, config(10)), InvalidArgument);
  EXPECT_THROW(evaluate({{"z", a, Image(19, 20)}}, w, config(10)), DimensionMismatch);
}

} // namespace
} // namespace dda
