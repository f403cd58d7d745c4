// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rate equations, operating point, linearisation and large-signal solver.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <cstring>
#include <random>

#include "dmltwin/errors.hpp"
#include "dmltwin/laser/normalize.hpp"
#include "dmltwin/laser/rate_equations.hpp"
#include "dmltwin/laser/simulate.hpp"

using namespace dmltwin;
using namespace dmltwin::laser;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent transcription of the two rate equations.
std::pair<double, double> reference_rhs(double N, double S, double I, const LaserParams& p) {
  const double stim = p.g0 * (N - p.n0) * S / (1.0 + p.eps * S);
  const double dn = I / (p.q_e * p.v_act) - N / p.tau_n - stim;
  const double ds = p.gamma_c * stim - S / p.tau_p + p.gamma_c * p.beta_sp * N / p.tau_n;
  return {dn, ds};
}

// Complex amplitude of the tone at f, projected over an integer number of periods.
std::complex<double> tone(const std::vector<double>& x, std::size_t from, double fs, double f) {
  std::complex<double> acc = 0.0;
  double mean = 0.0;
  for (std::size_t j = from; j < x.size(); ++j) mean += x[j];
  mean /= static_cast<double>(x.size() - from);
  for (std::size_t j = from; j < x.size(); ++j) {
    const double t = static_cast<double>(j) / fs;
    acc += (x[j] - mean) * std::exp(std::complex<double>(0.0, -2.0 * kPi * f * t));
  }
  return 2.0 * acc / static_cast<double>(x.size() - from);
}

}  // namespace

TEST_CASE("reference parameters validate and put f_R in the 5-30 GHz band", "[laser]") {
  LaserParams p;
  p.validate();
  CHECK(p.threshold_density() > p.n0);
  const double fr = relaxation_frequency(p, 3.0 * p.threshold_current());
  CHECK(fr > 5e9);
  CHECK(fr < 30e9);
}

TEST_CASE("parameter validation rejects non-physical values", "[laser]") {
  LaserParams p;
  p.tau_p = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = {};
  p.beta_sp = 1.5;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = {};
  p.gamma_c = 1.2;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  CHECK_THROWS_AS((BiasMap{1e-3, 3e-3}.validate()), ParameterError);
  CHECK_NOTHROW(BiasMap::defaults_for(LaserParams{}).validate());
}

TEST_CASE("derivatives match an independent evaluation", "[laser]") {
  LaserParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> un(0.5e24, 3e24), us(0.0, 5e21), ui(1e-3, 0.2);
  for (int k = 0; k < 200; ++k) {
    const double N = un(rng), S = us(rng), I = ui(rng);
    const auto d = derivatives({N, S}, I, p);
    const auto [dn, ds] = reference_rhs(N, S, I, p);
    CHECK_THAT(d.d_carriers, WithinRel(dn, 1e-12) || WithinAbs(dn, 1e-12 * std::abs(I / (p.q_e * p.v_act))));
    CHECK_THAT(d.d_photons, WithinRel(ds, 1e-12) || WithinAbs(ds, 1e-12 * S / p.tau_p + 1.0));
  }
  LaserParams dark = p;
  dark.beta_sp = 1e-300;
  CHECK(std::abs(derivatives({2e24, 0.0}, 0.05, dark).d_photons) < 1e-250);
}

TEST_CASE("steady state is a fixed point", "[laser]") {
  LaserParams p;
  const double ith = p.threshold_current();
  for (double m : {0.1, 0.5, 1.2, 2.0, 3.0, 4.0}) {
    const double I = m * ith;
    const auto st = steady_state(I, p);
    CHECK(st.carriers > 0.0);
    CHECK(st.photons > 0.0);
    const auto d = derivatives(st, I, p);
    const double pump = I / (p.q_e * p.v_act);
    const double loss = st.photons / p.tau_p;
    CHECK(std::abs(d.d_carriers) < 1e-6 * std::max(pump, st.carriers / p.tau_n));
    CHECK(std::abs(d.d_photons) < 1e-6 * std::max(loss, p.gamma_c * p.beta_sp * st.carriers / p.tau_n));
  }
  CHECK_THROWS_AS(steady_state(0.0, p), ParameterError);
}

TEST_CASE("below threshold the operating point follows the spontaneous floor", "[laser]") {
  LaserParams p;
  const double I = 0.1 * p.threshold_current();
  const auto st = steady_state(I, p);
  const double n_ref = I * p.tau_n / (p.q_e * p.v_act);
  CHECK_THAT(st.carriers, WithinRel(n_ref, 0.05));
  // Floor with the (negative) net gain below transparency kept in the loss term.
  const double s_ref =
      p.gamma_c * p.beta_sp * st.carriers / p.tau_n / (1.0 / p.tau_p - p.gamma_c * p.g0 * (st.carriers - p.n0));
  CHECK_THAT(st.photons, WithinRel(s_ref, 0.05));
}

TEST_CASE("above threshold the gain clamps at the loss", "[laser]") {
  LaserParams p;
  const auto st = steady_state(2.0 * p.threshold_current(), p);
  const double lhs = p.gamma_c * p.g0 * (st.carriers - p.n0) / (1.0 + p.eps * st.photons);
  const double rhs = 1.0 / p.tau_p - p.gamma_c * p.beta_sp * st.carriers / (p.tau_n * st.photons);
  CHECK_THAT(lhs, WithinRel(rhs, 1e-9));
}

TEST_CASE("relaxation frequency equals the Jacobian eigenvalue", "[laser]") {
  LaserParams p;
  const double I = 3.0 * p.threshold_current();
  const auto st = steady_state(I, p);
  // Finite-difference Jacobian, eigenvalues from the characteristic polynomial.
  const double hn = 1e-6 * st.carriers, hs = 1e-6 * st.photons;
  auto f = [&](double N, double S) { return reference_rhs(N, S, I, p); };
  const auto [an, bn] = f(st.carriers + hn, st.photons);
  const auto [cn, dn] = f(st.carriers - hn, st.photons);
  const auto [as, bs] = f(st.carriers, st.photons + hs);
  const auto [cs, ds] = f(st.carriers, st.photons - hs);
  const double j11 = (an - cn) / (2 * hn), j21 = (bn - dn) / (2 * hn);
  const double j12 = (as - cs) / (2 * hs), j22 = (bs - ds) / (2 * hs);
  const double tr = j11 + j22, det = j11 * j22 - j12 * j21;
  const std::complex<double> lam = 0.5 * tr + 0.5 * std::sqrt(std::complex<double>(tr * tr - 4 * det));
  CHECK_THAT(relaxation_frequency(p, I), WithinRel(std::abs(lam.imag()) / (2 * kPi), 1e-6));

  const auto ja = jacobian(st, p);
  const double tra = ja.trace(), deta = ja.det();
  const std::complex<double> lam_a = 0.5 * tra + 0.5 * std::sqrt(std::complex<double>(tra * tra - 4 * deta));
  CHECK_THAT(relaxation_frequency(p, I), WithinRel(std::abs(lam_a.imag()) / (2 * kPi), 1e-9));
}

TEST_CASE("relaxation frequency rises with bias", "[laser]") {
  LaserParams p;
  const double ith = p.threshold_current();
  double prev = 0.0;
  for (double m = 1.5; m <= 4.0 + 1e-9; m += 0.1) {
    const double fr = relaxation_frequency(p, m * ith);
    CHECK(fr > prev);
    prev = fr;
  }
}

TEST_CASE("overdamped operating point is a domain error", "[laser]") {
  LaserParams p;
  p.eps = 1e-21;  // heavy gain compression
  CHECK_THROWS_AS(relaxation_frequency(p, 3.0 * p.threshold_current()), DomainError);
  CHECK_THROWS_AS(small_signal_response(p, 3.0 * p.threshold_current(), 1e9), DomainError);
}

TEST_CASE("small-signal response is normalised and peaks near f_R", "[laser]") {
  LaserParams p;
  const double I = 3.0 * p.threshold_current();
  const double fr = relaxation_frequency(p, I);
  CHECK_THAT(std::abs(small_signal_response(p, I, 0.0) - 1.0), WithinAbs(0.0, 1e-15));
  double best_f = 0.0, best = 0.0;
  for (int k = 1; k <= 4000; ++k) {
    const double f = 3.0 * fr * k / 4000.0;
    const double mag = std::abs(small_signal_response(p, I, f));
    if (mag > best) best = mag, best_f = f;
  }
  CHECK_THAT(best_f, WithinRel(fr, 0.10));
  // Past the peak the magnitude falls monotonically and drops below the low-frequency level.
  double prev = best;
  for (double f = best_f; f <= 4.0 * fr; f += 0.01 * fr) {
    const double mag = std::abs(small_signal_response(p, I, f));
    CHECK(mag <= prev + 1e-12);
    prev = mag;
  }
  CHECK(std::abs(small_signal_response(p, I, 2.0 * fr)) < std::abs(small_signal_response(p, I, 0.1 * fr)));
}

TEST_CASE("constant drive holds the operating point", "[laser][sim]") {
  LaserParams p;
  const auto bias = BiasMap::defaults_for(p);
  const double fs = 32.0 * 5e9;
  std::vector<double> drive(32 * 40, 0.5);
  const auto out = simulate_power(drive, fs, bias, p);
  const double ref = steady_state(bias.i_bias, p).photons;
  double worst = 0.0;
  for (std::size_t j = 32; j < out.size(); ++j) worst = std::max(worst, std::abs(out[j] / ref - 1.0));
  CHECK(worst < 1e-6);
}

TEST_CASE("weak sinusoidal modulation reproduces the linear response", "[laser][sim]") {
  LaserParams p;
  const auto bias = BiasMap::defaults_for(p);
  const double fr = relaxation_frequency(p, bias.i_bias);
  const double amp = 0.01 * bias.i_bias / bias.i_pp;  // 1% modulation index
  const auto st = steady_state(bias.i_bias, p);
  // DC slope dS/dI from two independent operating points.
  const double di = 1e-6 * bias.i_bias;
  const double slope = (steady_state(bias.i_bias + di, p).photons - steady_state(bias.i_bias - di, p).photons) / (2 * di);
  (void)st;

  for (double ratio : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 1.2}) {
    const double f = ratio * fr;
    const double fs = 128.0 * f;
    const auto settle = static_cast<std::size_t>(std::ceil(3e-9 * f)) * 128;
    const std::size_t n = settle + 6 * 128 + 1;
    std::vector<double> drive(n);
    for (std::size_t j = 0; j < n; ++j) drive[j] = 0.5 + amp * std::sin(2 * kPi * f * static_cast<double>(j) / fs);
    auto out = simulate_power(drive, fs, bias, p);
    out.pop_back();
    const auto got = tone(out, settle, fs, f);
    // A sine of amplitude a has complex amplitude -j a.
    const std::complex<double> want =
        small_signal_response(p, bias.i_bias, f) * slope * amp * bias.i_pp * std::complex<double>(0.0, -1.0);
    INFO("f/f_R = " << ratio);
    CHECK_THAT(std::abs(got), WithinRel(std::abs(want), 0.02));
    CHECK(std::abs(std::arg(got / want)) * 180.0 / kPi < 3.0);
  }
}

TEST_CASE("halving the tolerances barely changes the waveform", "[laser][sim]") {
  LaserParams p;
  const auto bias = BiasMap::defaults_for(p);
  const double fr = relaxation_frequency(p, bias.i_bias);
  const double fs = 32.0 * fr;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> lvl(0, 3);
  std::vector<double> drive;
  for (int s = 0; s < 64; ++s) {
    const double v = lvl(rng) / 3.0;
    for (int k = 0; k < 32; ++k) drive.push_back(v);
  }
  for (bool dense : {true, false}) {
    SolverConfig a{.rel_tol = 1e-9, .abs_tol = 1e-9, .max_step = 0.0, .dense_output = dense};
    SolverConfig b{.rel_tol = 5e-10, .abs_tol = 5e-10, .max_step = 0.0, .dense_output = dense};
    const auto x = detect_and_normalize(simulate_power(drive, fs, bias, p, a)).values;
    const auto y = detect_and_normalize(simulate_power(drive, fs, bias, p, b)).values;
    double ss = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) ss += (x[j] - y[j]) * (x[j] - y[j]);
    INFO("dense=" << dense);
    CHECK(std::sqrt(ss / x.size()) < 1e-7);
  }
}

TEST_CASE("simulation is deterministic and validates input", "[laser][sim]") {
  LaserParams p;
  const auto bias = BiasMap::defaults_for(p);
  std::vector<double> drive(500);
  for (std::size_t j = 0; j < drive.size(); ++j) drive[j] = (j / 32) % 2 ? 1.0 : 0.0;
  const auto a = simulate_power(drive, 1.6e11, bias, p);
  const auto b = simulate_power(drive, 1.6e11, bias, p);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  for (double v : a) CHECK(v > 0.0);

  drive[3] = std::nan("");
  CHECK_THROWS_AS(simulate_power(drive, 1.6e11, bias, p), ParameterError);
  CHECK_THROWS_AS(simulate_power({}, 1.6e11, bias, p), ParameterError);
  SolverConfig bad{.rel_tol = 0.1};
  CHECK_THROWS_AS(simulate_power(std::vector<double>(4, 0.5), 1.6e11, bias, p, bad), ParameterError);
}

TEST_CASE("min-max normalisation", "[laser][normalize]") {
  const std::vector<double> x{2, 4, 6};
  const auto nw = detect_and_normalize(x);
  CHECK(nw.values == std::vector<double>{0, 0.5, 1});
  CHECK(nw.record.min == 2.0);
  CHECK(nw.record.max == 6.0);
  const auto later = normalize(std::vector<double>{0, 8}, nw.record);
  CHECK(later[0] == -0.5);
  CHECK(later[1] == 1.5);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(3.0, 10.0);
  std::vector<double> r(100);
  for (auto& v : r) v = g(rng);
  const auto rt = detect_and_normalize(r);
  const auto back = denormalize(rt.values, rt.record);
  for (std::size_t j = 0; j < r.size(); ++j) CHECK_THAT(back[j], WithinAbs(r[j], 1e-12 * (1 + std::abs(r[j]))));

  CHECK_THROWS_AS(detect_and_normalize(std::vector<double>{1, 1, 1}), DomainError);
}
