// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Losses, Adam, the epoch loop with best-checkpoint selection, and a small
// grid-search driver.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmltwin/autodiff/gradcheck.hpp"
#include "dmltwin/stimulus/dataset.hpp"
#include "dmltwin/surrogates/checkpoint.hpp"
#include "dmltwin/surrogates/model.hpp"

namespace dmltwin::train {

/// mean((pred - target)^2) / range^2. DimensionError on length mismatch.
double nmse(std::span<const double> pred, std::span<const double> target, double range = 1.0);
double nrmse(std::span<const double> pred, std::span<const double> target, double range = 1.0);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  void validate() const;
};

struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::uint64_t step = 0;
  static AdamState zeros(const std::vector<ad::NamedTensor>& params);
};

/// One bias-corrected Adam update from the gradients held by the tensors.
/// Throws NumericalError, leaving parameters untouched, on a non-finite gradient.
void adam_step(std::vector<ad::NamedTensor>& params, AdamState& state, const AdamConfig& cfg);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::size_t batch_size = 32;  // sequences
  std::size_t epochs = 60;
  std::uint64_t seed = 1;
  surrogate::Profile profile = surrogate::Profile::desk;

  /// Learning rate found to work per model kind at desk scale.
  static TrainConfig defaults_for(surrogate::ModelKind kind, surrogate::Profile profile = surrogate::Profile::desk);
  AdamConfig adam() const { return {learning_rate, beta1, beta2, eps_adam}; }
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_nmse = 0.0;
  double val_nmse = 0.0;
  double val_nrmse = 0.0;
  double train_seconds = 0.0;  // wall clock of the whole pass
  double val_seconds = 0.0;
  std::vector<double> batch_seconds;
};

struct TrainHistory {
  double initial_val_nmse = 0.0;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0: initial weights
  bool aborted = false;
  std::string abort_reason;

  double best_val_nmse() const;
  /// Columns: epoch, train_nmse, val_nrmse, epoch_seconds, val_seconds.
  void write_csv(const std::filesystem::path& path) const;
  /// Reads the columns written by write_csv; batch times are not stored.
  static TrainHistory read_csv(const std::filesystem::path& path);
};

struct TrainResult {
  surrogate::SurrogateModel model;  // best checkpoint
  surrogate::CheckpointMeta meta;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Full shuffled passes over the training split; validation after every epoch
/// with frozen weights; the lowest-validation-loss weights are returned. A
/// non-finite loss or gradient stops training and returns the best weights so far.
TrainResult train_surrogate(const surrogate::SurrogateModel& init, const stim::Dataset& ds, const TrainConfig& cfg,
                            const EpochCallback& on_epoch = {});

/// NRMSE over every sample of a split.
double evaluate(const surrogate::SurrogateModel& m, const std::vector<stim::SequencePair>& split,
                std::size_t batch = 32);
double evaluate_nmse(const surrogate::SurrogateModel& m, const std::vector<stim::SequencePair>& split,
                     std::size_t batch = 32);

struct GridEntry {
  std::size_t grid_index = 0;
  surrogate::ModelHyper hyper;
  double val_nrmse = 0.0;
};

struct GridResult {
  surrogate::ModelHyper best;
  std::vector<GridEntry> leaderboard;  // ascending val_nrmse, ties by grid order
};

/// Trains each candidate with the same config and init seed. ParameterError on
/// an empty grid or a candidate of another kind.
GridResult grid_search(surrogate::ModelKind kind, const std::vector<surrogate::ModelHyper>& grid,
                       const stim::Dataset& ds, const TrainConfig& cfg);

nlohmann::json to_json(const TrainConfig& cfg);
/// Fields absent from j keep the values of base; present fields are type-checked.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base);
std::string config_hash(const TrainConfig& cfg, const surrogate::ModelHyper& hyper);

}  // namespace dmltwin::train
