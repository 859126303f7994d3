// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "dda/error.hpp"
#include "dda/synthgen.hpp"
#include "dda/trainer.hpp"
#include "test_util.hpp"

namespace dda {
namespace {

std::vector<TrainingPair> dataset(int n, int side, std::uint64_t seed) {
  GenOptions opts;
  opts.patch_height = opts.patch_width = side;
  std::vector<TrainingPair> out;
  for (int i = 0; i < n; ++i) {
    GeneratedPair p = gen_pair(seed, i, opts);
    const double s = moire_score(p.moire, opts.prior).score;
    out.push_back({std::move(p.moire), std::move(p.clean), s});
  }
  return out;
}

const SupernetSpec kSmall{3, 8, 3, true};

TEST(Trainer, ZeroEpochsReturnsInitialization) {
  const auto data = dataset(6, 12, 1);
  TrainOptions opts;
  opts.epochs = 0;
  opts.seed = 42;
  const TrainResult r = train_supernet(data, kSmall, opts);
  EXPECT_EQ(r.weights, init_weights(kSmall, 42));
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.thresholds.num_groups(), 3);
}

TEST(Trainer, DeterministicForSeed) {
  const auto data = dataset(12, 12, 2);
  TrainOptions opts;
  opts.epochs = 2;
  opts.learning_rate = 1e-3;
  opts.seed = 5;
  EXPECT_EQ(train_supernet(data, kSmall, opts).weights, train_supernet(data, kSmall, opts).weights);
}

TEST(Trainer, LogCoversEachGroupAtItsWidth) {
  const auto data = dataset(24, 12, 3);
  TrainOptions opts;
  opts.epochs = 3;
  opts.learning_rate = 1e-3;
  const TrainResult r = train_supernet(data, kSmall, opts);
  ASSERT_EQ(r.log.size(), 9u);
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    EXPECT_EQ(r.log[i].epoch, static_cast<int>(i / 3));
    EXPECT_EQ(r.log[i].width, opts.widths[i % 3]);
    EXPECT_GT(r.log[i].batches, 0u);
  }
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Trainer, SingleWidthLossDecreases) {
  const auto data = dataset(16, 16, 4);
  TrainOptions opts;
  opts.widths = {1.0};
  opts.epochs = 12;
  opts.learning_rate = 2e-3;
  opts.step_decay = false;
  const TrainResult r = train_supernet(data, kSmall, opts);
  ASSERT_EQ(r.log.size(), 12u);
  EXPECT_LT(r.log.back().mean_loss, r.log.front().mean_loss);
}

// Pairs binned into the lowest class only ever train the narrowest prefix.
TEST(Trainer, EmptyClassesWarnAndWiderWeightsStayAtInit) {
  const auto data = dataset(8, 12, 5);
  TrainOptions opts;
  opts.epochs = 2;
  opts.learning_rate = 1e-3;
  opts.seed = 9;
  opts.thresholds = Thresholds{{1e9, 2e9}};
  const TrainResult r = train_supernet(data, kSmall, opts);
  EXPECT_EQ(r.warnings.size(), 2u);
  const SupernetWeights init = init_weights(kSmall, 9);
  const SubnetView view(r.weights, 0.25);
  for (int l = 0; l < kSmall.num_layers; ++l) {
    const LayerParams& a = r.weights.layers()[l];
    const LayerParams& b = init.layers()[l];
    for (int o = view.layers()[l].c_out; o < a.c_out; ++o) EXPECT_EQ(a.bias[o], b.bias[o]);
  }
  EXPECT_NE(r.weights, init);
}

TEST(Trainer, Errors) {
  const auto data = dataset(4, 8, 6);
  TrainOptions opts;
  EXPECT_THROW(train_supernet(std::span<const TrainingPair>(), kSmall, opts), InvalidArgument);
  opts.widths = {0.5, 0.5};
  EXPECT_THROW(train_supernet(data, kSmall, opts), InvalidArgument);
  opts.widths = {0.5, 1.0};
  opts.batch_size = 0;
  EXPECT_THROW(train_supernet(data, kSmall, opts), InvalidArgument);
  opts.batch_size = 2;
  opts.thresholds = Thresholds{{1.0, 2.0}};
  EXPECT_THROW(train_supernet(data, kSmall, opts), InvalidArgument);
}

TEST(Trainer, StepDecaySchedule) {
  TrainOptions opts;
  opts.learning_rate = 1.0;
  opts.epochs = 8;
  EXPECT_EQ(learning_rate_for_epoch(opts, 0), 1.0);
  EXPECT_EQ(learning_rate_for_epoch(opts, 3), 1.0);
  EXPECT_DOUBLE_EQ(learning_rate_for_epoch(opts, 4), 0.1);
  EXPECT_DOUBLE_EQ(learning_rate_for_epoch(opts, 6), 0.01);
  opts.step_decay = false;
  EXPECT_EQ(learning_rate_for_epoch(opts, 7), 1.0);
}

TEST(Trainer, LoadsPairsFromManifest) {
  const auto dir = testing::scratch_dir();
  GenOptions g;
  g.patch_height = g.patch_width = 16;
  const auto manifest = gen_dataset(5, 3, dir, g);
  const auto pairs = load_training_pairs(manifest);
  ASSERT_EQ(pairs.size(), 5u);
  EXPECT_EQ(pairs[2].moire, gen_pair(3, 2, g).moire);
}

} // namespace
} // namespace dda
