// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Model checkpoints in the shared container format.

#pragma once

#include <filesystem>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "dmltwin/surrogates/model.hpp"

namespace dmltwin::surrogate {

struct CheckpointMeta {
  std::string train_config_hash;
  std::string dataset_hash;
  double rate_fraction = 0.0;
  int epoch = -1;  // -1: initial weights
  double val_nrmse = std::numeric_limits<double>::quiet_NaN();
};

nlohmann::json hyper_to_json(const ModelHyper& h);
ModelHyper hyper_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const SurrogateModel& m, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  SurrogateModel model;
  CheckpointMeta meta;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dmltwin::surrogate
