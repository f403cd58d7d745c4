// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// The four surrogate channel models. Every model maps a batch of drive
// sequences x[B x T] to predicted power y[B x T], sample-aligned and causal.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmltwin/autodiff/gradcheck.hpp"
#include "dmltwin/autodiff/ops.hpp"

namespace dmltwin::surrogate {

enum class ModelKind { volterra, tdnn, lstm, cat };
enum class Profile { paper, desk };

std::string to_string(ModelKind k);
std::string to_string(Profile p);
ModelKind parse_model_kind(const std::string& s);  // ParameterError on unknown names
Profile parse_profile(const std::string& s);

struct ModelHyper {
  ModelKind kind = ModelKind::volterra;
  Profile profile = Profile::desk;
  int hidden_nodes = 0;   // TDNN/LSTM width, CAT MLP hidden size
  int hidden_layers = 0;  // LSTM layers, CAT decoder layers, TDNN hidden layers
  int mlp_sublayers = 0;  // CAT: one MLP sublayer per decoder layer
  int conv_window = 0;    // CAT Q/K/embedding conv, TDNN input window
  int embed_dim = 0;
  int n_heads = 0;
  int memory = 0;         // Volterra
  int max_len = 1024;     // CAT positional table length

  static ModelHyper make(ModelKind kind, Profile profile);
  /// Throws ParameterError naming the first violated invariant.
  void validate() const;
};

struct SurrogateModel {
  ModelHyper hyper;
  std::vector<ad::NamedTensor> params;  // declaration order is the checkpoint order
  std::uint64_t seed = 0;

  const ad::Tensor& param(const std::string& name) const;  // ContractError if absent
  std::size_t parameter_count() const;
  SurrogateModel clone() const;  // deep copy of every parameter
  void set_requires_grad(bool flag);
  void zero_grad() const;
};

/// Closed-form parameter count of a hyper setting.
std::size_t expected_parameter_count(const ModelHyper& h);

/// Weights U(-sqrt(1/fan_in), sqrt(1/fan_in)), biases 0, LSTM forget bias 1,
/// CAT positional table N(0, 0.02), layer-norm gain 1 / shift 0.
SurrogateModel init_model(const ModelHyper& hyper, std::uint64_t seed);

/// Per-layer, per-head attention matrices ([T x T] row-major) for one sequence.
struct AttentionTrace {
  std::vector<std::vector<std::vector<double>>> weights;  // [layer][head]
};

ad::Tensor volterra_forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x);
ad::Tensor tdnn_forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x);
ad::Tensor lstm_forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x);
/// `trace` is only filled for single-sequence input.
ad::Tensor cat_forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x, AttentionTrace* trace = nullptr);

/// Dispatch over hyper.kind. x is [B x T] (rank 1 is treated as B = 1).
ad::Tensor forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x);

/// Inference on a list of sequences of equal length, processed in batches.
std::vector<std::vector<double>> predict(const SurrogateModel& m, const std::vector<std::vector<double>>& xs,
                                         std::size_t batch = 32);

}  // namespace dmltwin::surrogate
