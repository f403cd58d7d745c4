// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Min-max normalisation of detected power. The record is kept so the same
// affine map can be applied to later data; values outside [0,1] are allowed.

#pragma once

#include <span>
#include <vector>

namespace dmltwin::laser {

struct MinMaxRecord {
  double min = 0.0;
  double max = 1.0;

  /// Throws DomainError when max <= min or either bound is not finite.
  void validate() const;
  double apply(double x) const { return (x - min) / (max - min); }
  double invert(double y) const { return min + y * (max - min); }
};

MinMaxRecord min_max_of(std::span<const double> x);

std::vector<double> normalize(std::span<const double> x, const MinMaxRecord& rec);
std::vector<double> denormalize(std::span<const double> y, const MinMaxRecord& rec);

struct NormalizedWaveform {
  std::vector<double> values;
  MinMaxRecord record;
};

/// Maps the waveform onto [0,1] with its own extremes. Throws DomainError for a constant input.
NormalizedWaveform detect_and_normalize(std::span<const double> power);

}  // namespace dmltwin::laser
