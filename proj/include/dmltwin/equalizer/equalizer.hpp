// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// 31-tap FIR equalizer trained through a frozen channel (a surrogate or the
// ODE solver) and cross-tested on other channels.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmltwin/autodiff/tape.hpp"
#include "dmltwin/stimulus/dataset.hpp"
#include "dmltwin/surrogates/model.hpp"

namespace dmltwin::eq {

inline constexpr std::size_t kTaps = 31;
inline constexpr int kMaxDelay = 15;

struct FirEqualizer {
  std::vector<double> taps = std::vector<double>(kTaps, 0.0);
  int delay = 0;
  std::string channel;

  static FirEqualizer delta(std::size_t index = 0);
  void validate() const;  // ParameterError
};

/// y[t] = sum_k taps[k] x[t-k], zero before the start.
std::vector<double> fir_apply(const FirEqualizer& eq, std::span<const double> x);

struct EqRunConfig {
  double rate_fraction = 0.1;
  std::size_t n_symbols = 1024;  // multiple of the symbols per sequence
  std::uint64_t seed = 1;
  double learning_rate = 1e-3;
  std::size_t iterations = 1000;
  int sps = 32;
  int seq_len = 1024;
  double lpf_cutoff = 1.0;  // multiples of R_s

  void validate() const;
  std::size_t n_sequences() const { return n_symbols * static_cast<std::size_t>(sps) / static_cast<std::size_t>(seq_len); }
};

struct SquareStream {
  std::vector<std::vector<double>> raw;       // piecewise-constant levels before the LPF
  std::vector<std::vector<double>> waveform;  // after the LPF; the equalizer target
  std::vector<std::vector<int>> symbols;
};

/// Rectangular 4PAM at levels {0, 1/3, 2/3, 1}, cut into seq_len-sample
/// sequences and low-pass filtered like the training drive.
SquareStream gen_square_4pam(const EqRunConfig& cfg, std::mt19937_64& rng);

enum class EvalStream { training, held_out };
SquareStream stream_for(const EqRunConfig& cfg, EvalStream which);

/// Maps drive sequences to normalised received sequences.
struct Channel {
  std::string id;
  std::function<std::vector<std::vector<double>>(const std::vector<std::vector<double>>&)> apply;
};

Channel surrogate_channel(surrogate::SurrogateModel model);
/// ODE solver at the dataset's link and grid; output mapped with its stored min-max record.
Channel ode_channel(const stim::Dataset& ds);
Channel identity_channel();
Channel delay_channel(std::size_t samples);

/// NRMSE between fir_apply(eq, y) and the target delayed by eq.delay, over t >= delay.
double eq_nrmse(const FirEqualizer& eq, const std::vector<std::vector<double>>& received,
                const std::vector<std::vector<double>>& target);

struct EqTrainResult {
  FirEqualizer eq;
  std::vector<double> delay_scan;  // delta-tap NRMSE for delays 0..15
  double baseline_nrmse = 0.0;     // delta taps at the chosen delay
  double final_nrmse = 0.0;        // returned taps on the training stream
  std::vector<double> history;     // loss before each update
  bool aborted = false;
  std::string abort_reason;
};

/// Delay scan with delta taps, then Adam on the NRMSE. The lowest-loss taps
/// seen (the delta start included) are returned.
EqTrainResult train_equalizer(const Channel& channel, const EqRunConfig& cfg);
/// Same, on a caller-provided stream and precomputed channel output.
EqTrainResult train_equalizer_on(const std::vector<std::vector<double>>& received, const SquareStream& stream,
                                 const EqRunConfig& cfg, const std::string& channel_id);

/// Frozen taps applied to channel b on the chosen stream.
double cross_evaluate(const FirEqualizer& eq, const Channel& b, const EqRunConfig& cfg,
                      EvalStream which = EvalStream::held_out);

/// The differentiable loss used for training (exposed for gradient checks).
ad::Tensor eq_loss(ad::Tape& tape, const ad::Tensor& taps, const ad::Tensor& lagged, const ad::Tensor& target,
                   const ad::Tensor& weight);

nlohmann::json to_json(const FirEqualizer& eq);
FirEqualizer equalizer_from_json(const nlohmann::json& j);
void save_equalizer(const std::filesystem::path& path, const FirEqualizer& eq, const nlohmann::json& extra = {});
FirEqualizer load_equalizer(const std::filesystem::path& path);

nlohmann::json to_json(const EqRunConfig& cfg);
EqRunConfig eq_config_from_json(const nlohmann::json& j, EqRunConfig base);

}  // namespace dmltwin::eq
