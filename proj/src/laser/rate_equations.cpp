// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/laser/rate_equations.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "dmltwin/errors.hpp"

namespace dmltwin::laser {

void LaserParams::validate() const {
  const std::pair<const char*, double> fields[] = {{"g0", g0},       {"N0", n0},           {"eps", eps},
                                                   {"tau_n", tau_n}, {"tau_p", tau_p},     {"gamma_c", gamma_c},
                                                   {"beta_sp", beta_sp}, {"V_act", v_act}, {"q_e", q_e}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ParameterError(std::string("laser parameter ") + name + " must be positive and finite");
    }
  }
  if (beta_sp > 1.0) throw ParameterError("laser parameter beta_sp must be <= 1");
  if (gamma_c > 1.0) throw ParameterError("laser parameter gamma_c must be <= 1");
}

double LaserParams::threshold_density() const { return n0 + 1.0 / (gamma_c * g0 * tau_p); }

double LaserParams::threshold_current() const { return q_e * v_act * threshold_density() / tau_n; }

BiasMap BiasMap::defaults_for(const LaserParams& p) {
  const double ith = p.threshold_current();
  return BiasMap{3.0 * ith, 2.0 * ith};
}

void BiasMap::validate() const {
  if (!(i_pp > 0.0)) throw ParameterError("bias map: I_pp must be positive");
  if (!(i_bias - 0.5 * i_pp > 0.0)) {
    throw ParameterError("bias map: I_bias - I_pp/2 must be positive (drive current would go negative)");
  }
}

RateDerivatives derivatives(const RateState& s, double current, const LaserParams& p) {
  const double gain = p.g0 * (s.carriers - p.n0) / (1.0 + p.eps * s.photons);
  return {current / (p.q_e * p.v_act) - s.carriers / p.tau_n - gain * s.photons,
          p.gamma_c * gain * s.photons - s.photons / p.tau_p + p.gamma_c * p.beta_sp * s.carriers / p.tau_n};
}

Jacobian2 jacobian(const RateState& s, const LaserParams& p) {
  const double comp = 1.0 + p.eps * s.photons;
  const double gain = p.g0 * (s.carriers - p.n0) / comp;
  const double dgain_dn = p.g0 / comp;
  const double dgain_ds = -gain * p.eps / comp;
  Jacobian2 j;
  j.nn = -1.0 / p.tau_n - dgain_dn * s.photons;
  j.ns = -(gain + dgain_ds * s.photons);
  j.sn = p.gamma_c * dgain_dn * s.photons + p.gamma_c * p.beta_sp / p.tau_n;
  j.ss = p.gamma_c * (gain + dgain_ds * s.photons) - 1.0 / p.tau_p;
  return j;
}

RateState steady_state(double current, const LaserParams& p) {
  p.validate();
  if (!(current > 0.0)) throw ParameterError("steady_state: current must be positive");

  // Newton in scaled coordinates n = N/N_th, s = S/S_unit, S_unit = Gamma tau_p N_th / tau_n.
  const double n_scale = p.threshold_density();
  const double s_scale = p.gamma_c * p.tau_p * n_scale / p.tau_n;
  const double r_scale = n_scale / p.tau_n;  // carrier-equation rate scale
  const double ith = p.threshold_current();

  RateState x;
  if (current > ith) {
    x.carriers = n_scale;
    x.photons = p.gamma_c * p.tau_p * (current - ith) / (p.q_e * p.v_act);
  } else {
    x.carriers = current * p.tau_n / (p.q_e * p.v_act);
    x.photons = p.gamma_c * p.beta_sp * x.carriers * p.tau_p / p.tau_n;
  }

  auto residual = [&](const RateState& st) {
    const auto d = derivatives(st, current, p);
    const double a = d.d_carriers / r_scale;
    const double b = d.d_photons / (s_scale / p.tau_p);
    return std::pair{a, b};
  };
  auto norm = [](std::pair<double, double> r) { return std::hypot(r.first, r.second); };

  auto r = residual(x);
  for (int iter = 0; iter < 200; ++iter) {
    if (norm(r) < 1e-13) return x;
    const auto d = derivatives(x, current, p);
    const auto j = jacobian(x, p);
    const double det = j.det();
    if (!(std::abs(det) > 0.0)) break;
    // Newton step on the unscaled system.
    const double dn = (-d.d_carriers * j.ss + d.d_photons * j.ns) / det;
    const double ds = (-d.d_photons * j.nn + d.d_carriers * j.sn) / det;
    double lambda = 1.0;
    RateState trial;
    auto r_trial = r;
    for (int k = 0; k < 60; ++k) {
      trial = {x.carriers + lambda * dn, x.photons + lambda * ds};
      if (trial.carriers > 0.0 && trial.photons > 0.0) {
        r_trial = residual(trial);
        if (norm(r_trial) < norm(r) || norm(r_trial) < 1e-13) break;
      }
      lambda *= 0.5;
    }
    x = trial;
    r = r_trial;
  }
  if (norm(r) < 1e-13) return x;
  std::ostringstream os;
  os << "steady_state: no convergence in 200 iterations at I=" << current << " A (scaled residual " << norm(r) << ")";
  throw NumericalError(os.str());
}

double relaxation_frequency(const LaserParams& p, double i_bias) {
  const auto j = jacobian(steady_state(i_bias, p), p);
  const double half_tr = 0.5 * j.trace();
  const double disc = half_tr * half_tr - j.det();
  if (disc >= 0.0) {
    std::ostringstream os;
    os << "relaxation_frequency: operating point at I=" << i_bias << " A is overdamped (real eigenvalues)";
    throw DomainError(os.str());
  }
  return std::sqrt(-disc) / (2.0 * std::numbers::pi);
}

std::complex<double> small_signal_response(const LaserParams& p, double i_bias, double frequency) {
  const auto j = jacobian(steady_state(i_bias, p), p);
  const double half_tr = 0.5 * j.trace();
  if (half_tr * half_tr - j.det() >= 0.0) {
    throw DomainError("small_signal_response: operating point is overdamped");
  }
  // (s I - J)^-1 B with B = [1/(qV), 0]; the photon row is J_sn / det(s I - J).
  auto h = [&](std::complex<double> s) { return j.sn / ((s - j.nn) * (s - j.ss) - j.ns * j.sn); };
  const std::complex<double> s(0.0, 2.0 * std::numbers::pi * frequency);
  return h(s) / h(0.0);
}

}  // namespace dmltwin::laser
