// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/stimulus/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dmltwin/errors.hpp"

namespace dmltwin::stim {

std::vector<double> gaussian_taps(double f_cut, double f_s) {
  if (!(f_s > 0.0) || !(f_cut > 0.0) || !(f_cut < 0.5 * f_s)) {
    throw ParameterError("lowpass_filter: cutoff must satisfy 0 < f_cut < f_s/2");
  }
  // |H(f)| = exp(-(2 pi f sigma)^2 / 2) reaches 1/sqrt(2) at f_cut.
  const double sigma = std::sqrt(std::numbers::ln2) / (2.0 * std::numbers::pi * f_cut) * f_s;
  const auto half = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double v = std::exp(-0.5 * (k / sigma) * (k / sigma));
    taps[static_cast<std::size_t>(k + half)] = v;
    sum += v;
  }
  for (auto& v : taps) v /= sum;
  return taps;
}

std::vector<double> lowpass_filter(std::span<const double> x, double f_cut, double f_s) {
  const auto taps = gaussian_taps(f_cut, f_s);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(taps.size() / 2);
  std::vector<double> y(x.size(), 0.0);
  if (x.empty()) return y;
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const std::ptrdiff_t i = std::clamp<std::ptrdiff_t>(t - k, 0, n - 1);
      acc += taps[static_cast<std::size_t>(k + half)] * x[static_cast<std::size_t>(i)];
    }
    y[static_cast<std::size_t>(t)] = acc;
  }
  return y;
}

}  // namespace dmltwin::stim
