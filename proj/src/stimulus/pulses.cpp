// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/stimulus/pulses.hpp"

#include <cmath>

#include "dmltwin/errors.hpp"

namespace dmltwin::stim {

std::vector<double> supergaussian_pulse(double t0, double order, double t_sym, int sps) {
  if (!(t0 > 0.0) || !(t_sym > 0.0)) throw ParameterError("supergaussian_pulse: T0 and T_sym must be positive");
  if (!(order >= 1.0 && order <= 6.0)) throw ParameterError("supergaussian_pulse: order must lie in [1, 6]");
  if (sps <= 0) throw ParameterError("supergaussian_pulse: sps must be positive");
  std::vector<double> p(static_cast<std::size_t>(sps));
  for (int j = 0; j < sps; ++j) {
    const double t = t_sym * j / sps;
    const double u = std::abs(2.0 * (t - 0.5 * t_sym) / t0);
    p[static_cast<std::size_t>(j)] = std::exp(-0.5 * std::pow(u, 2.0 * order));
  }
  return p;
}

std::vector<double> random_pulse(int sps, std::mt19937_64& rng) {
  if (sps <= 0) throw ParameterError("random_pulse: sps must be positive");
  std::normal_distribution<double> g(0.5, 1.0);
  std::vector<double> p(static_cast<std::size_t>(sps));
  for (auto& v : p) v = std::abs(g(rng));
  return p;
}

ShapeDraw draw_shape_params(int block_index, double t_sym, int sps, std::mt19937_64& rng) {
  if (block_index % 2 != 0) return {false, 0.0, 0.0};
  std::normal_distribution<double> g(0.25 * t_sym, t_sym);
  std::uniform_real_distribution<double> u(1.0, 6.0);
  double t0 = 0.0;
  do {
    t0 = std::abs(g(rng));
  } while (t0 < t_sym / sps);
  return {true, t0, u(rng)};
}

}  // namespace dmltwin::stim
