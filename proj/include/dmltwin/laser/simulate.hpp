// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Large-signal response of the laser to a sampled drive waveform.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dmltwin/laser/rate_equations.hpp"
#include "dmltwin/ode/dormand_prince.hpp"

namespace dmltwin::laser {

struct SolverConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;  // on the scaled state (N/N_th, S/S_unit), both O(1)
  double max_step = 0.0;  // s; 0 means unbounded
  bool dense_output = true;  // false: step onto every sample instant instead

  /// Throws ParameterError unless both tolerances lie in (0, 1e-2].
  void validate() const;
};

struct LargeSignalResult {
  std::vector<double> photons;   // S(t_j), m^-3
  std::vector<double> carriers;  // N(t_j), m^-3
  ode::IntegratorStats stats;
};

/// Integrates from steady_state(I_bias) with I(t) = I_bias + (drive(t) - 0.5) I_pp,
/// drive linearly interpolated between samples t_j = j / f_s.
LargeSignalResult simulate_large_signal(std::span<const double> drive, double sample_rate, const BiasMap& bias,
                                        const LaserParams& p, const SolverConfig& cfg = {});

/// Detected power (proportional to S) on the input grid, without normalisation.
std::vector<double> simulate_power(std::span<const double> drive, double sample_rate, const BiasMap& bias,
                                   const LaserParams& p, const SolverConfig& cfg = {});

}  // namespace dmltwin::laser
