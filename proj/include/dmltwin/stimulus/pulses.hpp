// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pulse shapes and the per-block shape draw of the training stimulus.

#pragma once

#include <random>
#include <vector>

namespace dmltwin::stim {

inline constexpr double kPamLevels[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};

/// exp(-0.5 (2 (t - T_sym/2) / T0)^(2n)) at t_j = j T_sym / sps, j < sps.
std::vector<double> supergaussian_pulse(double t0, double order, double t_sym, int sps);

/// sps samples of |x|, x ~ N(0.5, 1).
std::vector<double> random_pulse(int sps, std::mt19937_64& rng);

struct ShapeDraw {
  bool super_gaussian = true;
  double t0 = 0.0;     // s, super-Gaussian blocks only
  double order = 0.0;  // super-Gaussian blocks only
};

/// Even blocks are super-Gaussian with T0 = |N(0.25 T_sym, sd T_sym)| (redrawn
/// below T_sym/sps) and n ~ U(1,6); odd blocks are random pulses.
ShapeDraw draw_shape_params(int block_index, double t_sym, int sps, std::mt19937_64& rng);

}  // namespace dmltwin::stim
