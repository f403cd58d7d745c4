// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment drivers: symbol-rate sweeps, eye diagrams and timing reports.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmltwin/equalizer/equalizer.hpp"
#include "dmltwin/stimulus/dataset.hpp"
#include "dmltwin/surrogates/model.hpp"
#include "dmltwin/training/train.hpp"

namespace dmltwin::eval {

using Log = std::function<void(const std::string&)>;

// ---- eye diagrams

struct EyeSpec {
  int time_bins = 64;
  int amp_bins = 256;
  int window_symbols = 2;
};

struct EyeDiagram {
  int time_bins = 0;
  int amp_bins = 0;
  int sps = 0;
  double amp_min = 0.0;
  double amp_max = 0.0;
  std::vector<std::uint64_t> counts;  // row-major [amp][time], amplitude row 0 = amp_min

  std::uint64_t at(int amp, int time) const {
    return counts[static_cast<std::size_t>(amp) * static_cast<std::size_t>(time_bins) + static_cast<std::size_t>(time)];
  }
  std::uint64_t total() const;
};

/// Folds samples modulo window_symbols * sps. ParameterError below four symbol periods.
EyeDiagram eye_diagram(std::span<const double> waveform, int sps, const EyeSpec& spec = {});

/// Between-rail over within-rail variance of the best time column, with the
/// column's amplitudes split into `rails` clusters by 1-D k-means.
double rail_separation_ratio(const EyeDiagram& eye, int rails = 4);

/// Binary PGM, high amplitudes at the top, log-scaled counts.
void write_eye_pgm(const std::filesystem::path& path, const EyeDiagram& eye);
/// JSON header plus the row-major counts as one array.
void write_eye_histogram(const std::filesystem::path& path, const EyeDiagram& eye, const nlohmann::json& meta);

/// 4PAM train of Gaussian (order-1) pulses with T0 = T_sym / 2, min-max normalised then low-pass filtered.
std::vector<double> gaussian_4pam_drive(std::size_t n_symbols, int sps, double lpf_cutoff, std::mt19937_64& rng);

// ---- rate sweep

std::vector<double> default_rates();

struct SweepSpec {
  std::vector<double> rates = default_rates();
  std::vector<surrogate::ModelKind> models = {surrogate::ModelKind::volterra, surrogate::ModelKind::tdnn,
                                              surrogate::ModelKind::lstm, surrogate::ModelKind::cat};
  surrogate::Profile scale = surrogate::Profile::desk;
  std::uint64_t data_seed = 1;
  std::uint64_t train_seed = 1;
  std::optional<std::size_t> epochs;       // overrides the per-model default
  std::optional<std::size_t> n_train_seq;  // overrides the scale's training-set size
  std::filesystem::path checkpoint_dir;    // written after training, read in load-only mode
  bool load_only = false;
  stim::LinkConfig link = stim::LinkConfig::defaults();
  nlohmann::json train_overrides = nlohmann::json::object();  // applied over the per-model defaults

  void validate() const;
  nlohmann::json to_json() const;
};

struct SweepRow {
  double rate_fraction = 0.0;
  surrogate::ModelKind model = surrogate::ModelKind::volterra;
  double val_nrmse = 0.0;
  double train_s_per_epoch = 0.0;
  double eval_s_per_epoch = 0.0;
};

std::string cell_name(surrogate::ModelKind kind, double rate_fraction);
stim::Dataset sweep_dataset(const SweepSpec& spec, double rate_fraction);

/// One row per (rate, model), rates outermost. Load-only mode throws
/// FileError naming a missing cell.
std::vector<SweepRow> run_rate_sweep(const SweepSpec& spec, const Log& log = {});
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows, const nlohmann::json& meta,
                     bool with_timing = true);

/// Trains a surrogate for one sweep cell, or loads it from the checkpoint
/// directory when present (required in load-only mode).
surrogate::SurrogateModel cell_model(const SweepSpec& spec, const stim::Dataset& ds, surrogate::ModelKind kind,
                                     const Log& log = {});

/// Un-equalized NRMSE between the low-pass-filtered drive and the normalised laser output.
double distortion_nrmse(const stim::Dataset& ds);

// ---- equalization grid

struct EqGridRow {
  std::string channel;  // surrogate kind or "ode"
  double rate_fraction = 0.0;
  double self_nrmse = 0.0;      // held-out stream through the training channel
  double ode_nrmse = 0.0;       // held-out stream through the ODE solver
  double train_nrmse = 0.0;     // final training loss
  double replay_nrmse = 0.0;    // frozen taps re-evaluated on the training channel and stream
  double baseline_nrmse = 0.0;  // delta taps at the chosen delay
};

/// Every (rate, channel) cell: surrogates from cell_model, then the ODE channel.
std::vector<EqGridRow> run_equalization_grid(const SweepSpec& spec, const eq::EqRunConfig& eq_cfg,
                                             const Log& log = {});
/// Columns: channel, rate_fraction, self_nrmse, ode_nrmse.
void write_equalization_csv(const std::filesystem::path& path, const std::vector<EqGridRow>& rows,
                            const nlohmann::json& meta);

// ---- timing

struct ModelTiming {
  std::string name;
  train::TrainHistory history;
  std::size_t train_samples = 0;  // samples per training epoch
  std::size_t val_samples = 0;    // samples per validation pass
};

struct TimingRow {
  std::string name;
  double train_s_per_epoch = 0.0;
  double val_s_per_epoch = 0.0;
  double inference_s_per_epoch = 0.0;  // validation throughput at the training-epoch sample count
  std::size_t epochs_used = 0;
};

struct TimingReport {
  std::vector<TimingRow> models;
  double ode_s_per_epoch = 0.0;  // solver time for the same sample count
  std::size_t samples_per_epoch = 0;

  bool all_faster_than_ode() const;
  std::string table() const;
  void write_csv(const std::filesystem::path& path, const nlohmann::json& meta) const;
};

/// Means over logged epochs, the first (warm-up) epoch dropped when more than one exists.
TimingReport timing_report(const std::vector<ModelTiming>& runs, double ode_seconds_per_sample);

/// Prefixes each key of meta as a '# key=value' line.
std::string meta_lines(const nlohmann::json& meta);

}  // namespace dmltwin::eval
