// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training stimulus and paired (drive -> detected power) datasets.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dmltwin/laser/normalize.hpp"
#include "dmltwin/laser/simulate.hpp"
#include "dmltwin/stimulus/pulses.hpp"

namespace dmltwin::stim {

struct StimulusSpec {
  double rate_fraction = 0.98;  // R_s / f_R
  int sps = 32;
  int seq_len = 1024;
  int block_len = 8;  // symbols per shape draw
  std::size_t n_train_seq = 512;
  std::size_t n_val_samples = 32 * 1024;
  std::uint64_t seed = 1;
  double lpf_cutoff = 1.0;  // multiples of R_s

  static StimulusSpec paper(double rate_fraction, std::uint64_t seed);
  static StimulusSpec desk(double rate_fraction, std::uint64_t seed);

  void validate() const;  // ParameterError naming the broken invariant
  int symbols_per_sequence() const { return seq_len / sps; }
  std::size_t n_val_seq() const { return n_val_samples / static_cast<std::size_t>(seq_len); }
};

/// Laser, operating point and solver settings that define the ODE channel.
struct LinkConfig {
  laser::LaserParams laser;
  laser::BiasMap bias;
  laser::SolverConfig solver;

  static LinkConfig defaults();
  double relaxation_frequency() const;
};

struct DriveSequence {
  std::vector<double> waveform;  // normalised and low-pass filtered
  std::vector<int> symbols;      // 4PAM indices 0..3
  std::vector<ShapeDraw> shapes;  // one per block
};

/// Pulses scaled by 4PAM levels, per-sequence min-max normalisation, then the Gaussian LPF.
DriveSequence build_drive_sequence(const StimulusSpec& spec, double symbol_rate, std::mt19937_64& rng);

struct SequencePair {
  std::vector<double> drive;
  std::vector<double> target;
  std::vector<int> symbols;
  std::vector<ShapeDraw> shapes;
};

struct Dataset {
  static constexpr int kFormatVersion = 1;

  StimulusSpec spec;
  LinkConfig link;
  double f_r = 0.0;          // Hz
  double symbol_rate = 0.0;  // Hz
  double sample_rate = 0.0;  // Hz
  laser::MinMaxRecord target_record;  // raw photon density -> [0,1] over the training split
  std::vector<SequencePair> train;
  std::vector<SequencePair> validation;
  double ode_seconds = 0.0;  // wall time spent in the solver
  std::size_t ode_samples = 0;
};

/// Drive, solve and normalise every sequence. Solver failures are rethrown with the sequence index.
Dataset generate_dataset(const StimulusSpec& spec, const LinkConfig& link);

/// Raw (un-normalised) laser output for a drive on the dataset grid.
std::vector<double> ode_power(const Dataset& ds, const std::vector<double>& drive);

std::string dataset_hash(const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace dmltwin::stim
