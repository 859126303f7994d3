// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/trainer.hpp"

#include <algorithm>
#include <random>

#include "dda/png_io.hpp"
#include "dda/synthgen.hpp"

namespace dda {

double learning_rate_for_epoch(const TrainOptions& options, int epoch) {
  double lr = options.learning_rate;
  if (!options.step_decay) return lr;
  const int first = options.epochs / 2, second = (3 * options.epochs) / 4;
  if (first > 0 && epoch >= first) lr *= 0.1;
  if (second > 0 && epoch >= second) lr *= 0.1;
  return lr;
}

TrainResult train_supernet(std::span<const TrainingPair> data, const SupernetSpec& spec,
                           const TrainOptions& options, const TrainLogger& logger) {
  if (data.empty()) throw InvalidArgument("training set is empty");
  validate_widths(options.widths, /*strict=*/true);
  if (options.batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (options.epochs < 0) throw InvalidArgument("epoch count must be >= 0");
  const int num_groups = static_cast<int>(options.widths.size());

  TrainResult result;
  if (options.thresholds) {
    result.thresholds = *options.thresholds;
    if (result.thresholds.num_groups() != num_groups)
      throw InvalidArgument("threshold count does not match width list");
  } else {
    std::vector<double> scores;
    for (const auto& p : data) scores.push_back(p.score);
    result.thresholds = dataset_thresholds(scores, num_groups);
  }

  std::vector<std::vector<std::size_t>> members(num_groups);
  for (std::size_t i = 0; i < data.size(); ++i)
    members[classify_by_threshold(data[i].score, result.thresholds)].push_back(i);
  for (int g = 0; g < num_groups; ++g)
    if (members[g].empty())
      result.warnings.push_back("group " + std::to_string(g) + " (width " +
                                std::to_string(options.widths[g]) + ") has no members; skipped");

  result.weights = init_weights(spec, options.seed);
  AdamState adam = AdamState::for_weights(result.weights);
  std::mt19937_64 rng(derive_seed(options.seed, 0x5eed));

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double lr = learning_rate_for_epoch(options, epoch);
    // Fisher-Yates with the raw engine so the order is stdlib-independent.
    for (auto& m : members)
      for (std::size_t i = m.size(); i > 1; --i) std::swap(m[i - 1], m[rng() % i]);

    std::vector<std::size_t> cursor(num_groups, 0);
    std::vector<double> loss_sum(num_groups, 0.0);
    std::vector<std::size_t> batches(num_groups, 0);
    std::vector<const TrainingPair*> batch;
    bool any = true;
    while (any) {
      any = false;
      for (int g = 0; g < num_groups; ++g) {
        if (cursor[g] >= members[g].size()) continue;
        any = true;
        const std::size_t end =
            std::min(members[g].size(), cursor[g] + static_cast<std::size_t>(options.batch_size));
        batch.clear();
        for (std::size_t i = cursor[g]; i < end; ++i) batch.push_back(&data[members[g][i]]);
        cursor[g] = end;
        loss_sum[g] += train_step(result.weights, options.widths[g], batch, adam, lr);
        ++batches[g];
        if (!result.weights.all_finite())
          throw Error("training diverged: non-finite weights at epoch " + std::to_string(epoch));
      }
    }
    for (int g = 0; g < num_groups; ++g) {
      if (batches[g] == 0) continue;
      TrainLogEntry entry{epoch, options.widths[g], loss_sum[g] / static_cast<double>(batches[g]),
                          batches[g]};
      result.log.push_back(entry);
      if (logger) logger(entry);
    }
  }
  return result;
}

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& manifest) {
  const auto entries = read_manifest(manifest);
  const auto dir = manifest.parent_path();
  std::vector<TrainingPair> pairs;
  pairs.reserve(entries.size());
  for (const auto& e : entries) {
    TrainingPair p{load_png(dir / e.moire_path), load_png(dir / e.clean_path), e.score};
    if (p.moire.height() != p.clean.height() || p.moire.width() != p.clean.width())
      throw DimensionMismatch("pair " + e.moire_path + " / " + e.clean_path + " differ in size");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

TrainResult train_supernet(const std::filesystem::path& manifest, const SupernetSpec& spec,
                           const TrainOptions& options, const TrainLogger& logger) {
  const auto pairs = load_training_pairs(manifest);
  return train_supernet(std::span<const TrainingPair>(pairs), spec, options, logger);
}

} // namespace dda
