// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dda/router.hpp"
#include "dda/supernet.hpp"

namespace dda {

struct TrainOptions {
  std::vector<double> widths = {0.25, 0.5, 0.75};
  int epochs = 1;
  int batch_size = 4;
  double learning_rate = 1e-4;
  /// Divide the learning rate by 10 at 1/2 and again at 3/4 of the epochs.
  bool step_decay = true;
  std::uint64_t seed = 0;
  /// Class boundaries; dataset quantiles of the pair scores when absent.
  std::optional<Thresholds> thresholds;
};

struct TrainLogEntry {
  int epoch = 0;
  double width = 0.0;
  double mean_loss = 0.0;
  std::size_t batches = 0;
};

struct TrainResult {
  SupernetWeights weights;
  Thresholds thresholds;
  std::vector<TrainLogEntry> log;
  std::vector<std::string> warnings;
};

using TrainLogger = std::function<void(const TrainLogEntry&)>;

/// Supernet training by complexity class: pairs are binned by score, and
/// batches are drawn round-robin over the classes, each batch from a single
/// class and applied to the subnet of that class's width (class g trains
/// widths[g]). Single-threaded apart from per-sample gradients inside a batch.
TrainResult train_supernet(std::span<const TrainingPair> data, const SupernetSpec& spec,
                           const TrainOptions& options, const TrainLogger& logger = {});

/// Loads every (moire, clean) pair listed in a synthgen manifest.
std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& manifest);

TrainResult train_supernet(const std::filesystem::path& manifest, const SupernetSpec& spec,
                           const TrainOptions& options, const TrainLogger& logger = {});

double learning_rate_for_epoch(const TrainOptions& options, int epoch);

} // namespace dda
