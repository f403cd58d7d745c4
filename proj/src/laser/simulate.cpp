// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/laser/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dmltwin/errors.hpp"

namespace dmltwin::laser {

void SolverConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw ParameterError("solver rel_tol must lie in (0, 1e-2]");
  if (!(abs_tol > 0.0 && abs_tol <= 1e-2)) throw ParameterError("solver abs_tol must lie in (0, 1e-2]");
  if (max_step < 0.0 || std::isnan(max_step)) throw ParameterError("solver max_step must be >= 0");
}

LargeSignalResult simulate_large_signal(std::span<const double> drive, double sample_rate, const BiasMap& bias,
                                        const LaserParams& p, const SolverConfig& cfg) {
  p.validate();
  bias.validate();
  cfg.validate();
  if (drive.empty()) throw ParameterError("simulate_large_signal: empty drive");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw ParameterError("simulate_large_signal: sample rate must be positive");
  }
  for (double d : drive) {
    if (!std::isfinite(d)) throw ParameterError("simulate_large_signal: drive contains non-finite samples");
  }

  const std::size_t n = drive.size();
  const double dt = 1.0 / sample_rate;
  const double n_unit = p.threshold_density();
  const double s_unit = p.gamma_c * p.tau_p * n_unit / p.tau_n;

  auto current_at = [&](double t) {
    const double pos = t * sample_rate;
    if (pos <= 0.0) return bias.current(drive[0]);
    const auto j = static_cast<std::size_t>(pos);
    if (j + 1 >= n) return bias.current(drive[n - 1]);
    const double frac = pos - static_cast<double>(j);
    return bias.current(drive[j] + frac * (drive[j + 1] - drive[j]));
  };
  auto rhs = [&](double t, const std::array<double, 2>& y, std::array<double, 2>& dy) {
    const auto d = derivatives({y[0] * n_unit, y[1] * s_unit}, current_at(t), p);
    dy[0] = d.d_carriers / n_unit;
    dy[1] = d.d_photons / s_unit;
  };

  const RateState init = steady_state(bias.i_bias, p);
  ode::StepControl ctl;
  ctl.rel_tol = cfg.rel_tol;
  ctl.abs_tol = cfg.abs_tol;
  if (cfg.max_step > 0.0) ctl.max_step = cfg.max_step;
  ode::DormandPrince45<2> solver(ctl);

  LargeSignalResult out;
  out.photons.resize(n);
  out.carriers.resize(n);
  out.carriers[0] = init.carriers;
  out.photons[0] = init.photons;

  const double t_end = static_cast<double>(n - 1) * dt;
  if (n == 1) return out;
  solver.start(rhs, 0.0, {init.carriers / n_unit, init.photons / s_unit}, t_end);

  auto check = [&]() {
    const auto& y = solver.y();
    if (y[1] < -cfg.abs_tol || y[0] < -cfg.abs_tol || !std::isfinite(y[0]) || !std::isfinite(y[1])) {
      std::ostringstream os;
      os << "simulate_large_signal: state left the physical region at t=" << solver.t()
         << " s (n=" << y[0] << ", s=" << y[1] << "); tighten the solver tolerances";
      throw NumericalError(os.str());
    }
  };

  std::size_t j = 1;
  if (cfg.dense_output) {
    // Steps may span several samples but never a kink of the interpolated drive.
    std::size_t next_kink = 1;
    auto advance_kink = [&] {
      while (next_kink + 1 < n &&
             std::abs(drive[next_kink + 1] - 2.0 * drive[next_kink] + drive[next_kink - 1]) <= 1e-14) {
        ++next_kink;
      }
    };
    advance_kink();
    while (j < n) {
      const double limit = std::min(t_end, static_cast<double>(next_kink) * dt);
      solver.step(rhs, limit);
      check();
      while (j < n && static_cast<double>(j) * dt <= solver.t()) {
        const auto y = (j == next_kink || j + 1 == n) ? solver.y() : solver.dense(static_cast<double>(j) * dt);
        out.carriers[j] = y[0] * n_unit;
        out.photons[j] = y[1] * s_unit;
        ++j;
      }
      if (solver.t() >= limit && next_kink + 1 < n) {
        ++next_kink;
        advance_kink();
      }
    }
  } else {
    for (; j < n; ++j) {
      const double tj = static_cast<double>(j) * dt;
      while (solver.t() < tj) {
        solver.step(rhs, tj);
        check();
      }
      out.carriers[j] = solver.y()[0] * n_unit;
      out.photons[j] = solver.y()[1] * s_unit;
    }
  }
  out.stats = solver.stats();
  return out;
}

std::vector<double> simulate_power(std::span<const double> drive, double sample_rate, const BiasMap& bias,
                                   const LaserParams& p, const SolverConfig& cfg) {
  return simulate_large_signal(drive, sample_rate, bias, p, cfg).photons;
}

}  // namespace dmltwin::laser
