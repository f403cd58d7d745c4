// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Zero-phase Gaussian low-pass filter.

#pragma once

#include <span>
#include <vector>

namespace dmltwin::stim {

/// Symmetric taps (odd length, unit sum) with a 3 dB point at f_cut, truncated at +-4 sigma.
std::vector<double> gaussian_taps(double f_cut, double f_s);

/// Centred convolution with gaussian_taps, edges extended by replication.
/// Throws ParameterError unless 0 < f_cut < f_s/2.
std::vector<double> lowpass_filter(std::span<const double> x, double f_cut, double f_s);

}  // namespace dmltwin::stim
