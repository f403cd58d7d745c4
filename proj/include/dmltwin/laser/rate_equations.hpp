// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-mode rate equations for carrier density N and photon density S:
//
//   dN/dt = I/(q V) - N/tau_n - g0 (N - N0)/(1 + eps S) S
//   dS/dt = Gamma g0 (N - N0)/(1 + eps S) S - S/tau_p + Gamma beta_sp N/tau_n
//
// plus the steady state, the small-signal linearisation around it and the
// relaxation frequency derived from that linearisation.

#pragma once

#include <complex>

namespace dmltwin::laser {

/// Physical constants, SI units.
struct LaserParams {
  double g0 = 8.1e-13;        // gain slope, m^3/s
  double n0 = 1.1e24;         // transparency carrier density, m^-3
  double eps = 1.0e-23;       // gain compression, m^3
  double tau_n = 2.0e-9;      // carrier lifetime, s
  double tau_p = 1.0e-12;     // photon lifetime, s
  double gamma_c = 0.3;       // confinement factor
  double beta_sp = 1e-4;      // spontaneous-emission coupling
  double v_act = 1.0e-16;     // active volume, m^3
  double q_e = 1.602176634e-19;

  /// Throws ParameterError when a field is non-positive or a fraction exceeds 1.
  void validate() const;
  /// N_th = N0 + 1/(Gamma g0 tau_p)
  double threshold_density() const;
  /// Current that sustains N_th without stimulated emission, q V N_th / tau_n.
  double threshold_current() const;
};

struct RateState {
  double carriers = 0.0;  // N, m^-3
  double photons = 0.0;   // S, m^-3
};

struct RateDerivatives {
  double d_carriers = 0.0;
  double d_photons = 0.0;
};

/// Maps a normalised drive d in [0,1] to I = i_bias + (d - 0.5) i_pp.
struct BiasMap {
  double i_bias = 0.0;  // A
  double i_pp = 0.0;    // A

  /// i_bias = 3 I_th, i_pp = 2 I_th.
  static BiasMap defaults_for(const LaserParams& p);
  /// Throws ParameterError unless i_bias - i_pp/2 > 0.
  void validate() const;
  double current(double drive) const { return i_bias + (drive - 0.5) * i_pp; }
};

RateDerivatives derivatives(const RateState& state, double current, const LaserParams& p);

/// 2x2 Jacobian of the right-hand side with respect to (N, S).
struct Jacobian2 {
  double nn = 0, ns = 0, sn = 0, ss = 0;
  double trace() const { return nn + ss; }
  double det() const { return nn * ss - ns * sn; }
};
Jacobian2 jacobian(const RateState& state, const LaserParams& p);

/// Fixed point of the rate equations at constant current (damped Newton).
/// Throws NumericalError after 200 iterations without convergence.
RateState steady_state(double current, const LaserParams& p);

/// Imaginary part of the Jacobian eigenvalues at steady_state(i_bias), over
/// 2 pi. Throws DomainError when the operating point is overdamped.
double relaxation_frequency(const LaserParams& p, double i_bias);

/// Current-to-photon transfer function of the linearised system, normalised
/// so that H(0) = 1.
std::complex<double> small_signal_response(const LaserParams& p, double i_bias, double frequency);

}  // namespace dmltwin::laser
