// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dormand-Prince 5(4) embedded Runge-Kutta integrator with PI step-size
// control and the 4th-order continuous extension of Hairer, Norsett & Wanner
// (Solving ODEs I, II.5/II.6). Fixed small state dimension.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "dmltwin/errors.hpp"

namespace dmltwin::ode {

struct StepControl {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 0.0;  // 0 -> 1e-14 * |t|-scaled floor
  double safety = 0.9;
  double beta = 0.04;  // PI stabilisation
  double fac_min = 0.2;
  double fac_max = 10.0;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

template <std::size_t N>
class DormandPrince45 {
 public:
  using State = std::array<double, N>;

  explicit DormandPrince45(StepControl ctl = {}) : ctl_(ctl) {}

  /// Begins integration at (t0, y0). `rhs(t, y, dydt)`.
  template <class Rhs>
  void start(Rhs&& rhs, double t0, const State& y0, double t_dir_end) {
    t_ = t0;
    y_ = y0;
    rhs(t_, y_, k_[0]);
    ++stats_.rhs_evals;
    h_ = initial_step(rhs, t_dir_end);
    fac_old_ = 1e-4;
  }

  /// Takes one accepted step, never past t_limit. Returns the step size used.
  template <class Rhs>
  double step(Rhs&& rhs, double t_limit) {
    const double floor = ctl_.min_step > 0 ? ctl_.min_step : 1e-14 * std::max(std::abs(t_), std::abs(t_limit));
    bool last_rejected = false;
    for (;;) {
      double h = std::min({h_, ctl_.max_step, t_limit - t_});
      if (h <= floor && t_limit - t_ > floor) {
        throw NumericalError("Dormand-Prince: step size underflow at t=" + std::to_string(t_) +
                             " (h=" + std::to_string(h) + ")");
      }
      const bool hits_limit = (t_limit - t_) <= h * (1.0 + 1e-12);
      if (hits_limit) h = t_limit - t_;
      State y_new;
      const double err = attempt(rhs, h, y_new);
      if (err <= 1.0 && std::isfinite(err)) {
        const double fac11 = std::pow(err, 0.2 - ctl_.beta * 0.75);
        double fac = fac11 / std::pow(fac_old_, ctl_.beta);
        fac = std::clamp(fac / ctl_.safety, 1.0 / ctl_.fac_max, 1.0 / ctl_.fac_min);
        double h_next = h / fac;
        if (last_rejected) h_next = std::min(h_next, h);
        fac_old_ = std::max(err, 1e-4);
        prepare_dense(h, y_new);
        t_prev_ = t_;
        y_prev_ = y_;
        t_ = hits_limit ? t_limit : t_ + h;
        y_ = y_new;
        k_[0] = k_[6];
        h_ = h_next;
        ++stats_.accepted;
        return h;
      }
      ++stats_.rejected;
      last_rejected = true;
      const double fac11 = std::isfinite(err) ? std::pow(err, 0.2 - ctl_.beta * 0.75) : 1.0 / ctl_.fac_min;
      h_ = h / std::min(1.0 / ctl_.fac_min, fac11 / ctl_.safety);
    }
  }

  /// Solution at t in [t_prev, t] of the last accepted step (4th-order dense output).
  State dense(double t) const {
    const double h = t_ - t_prev_;
    const double theta = h > 0 ? (t - t_prev_) / h : 1.0;
    const double theta1 = 1.0 - theta;
    State out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = rcont_[0][i] +
               theta * (rcont_[1][i] + theta1 * (rcont_[2][i] + theta * (rcont_[3][i] + theta1 * rcont_[4][i])));
    }
    return out;
  }

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const State& y() const { return y_; }
  const IntegratorStats& stats() const { return stats_; }

 private:
  // Butcher tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  // 5th minus 4th order weights.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  // Continuous extension.
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  template <class Rhs>
  double attempt(Rhs& rhs, double h, State& y_new) {
    State tmp;
    auto& k = k_;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k[0][i];
    rhs(t_ + c2 * h, tmp, k[1]);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
    rhs(t_ + c3 * h, tmp, k[2]);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    rhs(t_ + c4 * h, tmp, k[3]);
    for (std::size_t i = 0; i < N; ++i) {
      tmp[i] = y_[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
    }
    rhs(t_ + c5 * h, tmp, k[4]);
    for (std::size_t i = 0; i < N; ++i) {
      tmp[i] = y_[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i]);
    }
    rhs(t_ + h, tmp, k[5]);
    for (std::size_t i = 0; i < N; ++i) {
      y_new[i] = y_[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] + a76 * k[5][i]);
    }
    rhs(t_ + h, y_new, k[6]);
    stats_.rhs_evals += 6;

    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
      const double sc = ctl_.abs_tol + ctl_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
      sum += (e / sc) * (e / sc);
    }
    return std::sqrt(sum / static_cast<double>(N));
  }

  void prepare_dense(double h, const State& y_new) {
    const auto& k = k_;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = y_new[i] - y_[i];
      const double bspl = h * k[0][i] - ydiff;
      rcont_[0][i] = y_[i];
      rcont_[1][i] = ydiff;
      rcont_[2][i] = bspl;
      rcont_[3][i] = ydiff - h * k[6][i] - bspl;
      rcont_[4][i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
    }
  }

  template <class Rhs>
  double initial_step(Rhs& rhs, double t_end) {
    // Hairer's starting-step heuristic.
    double d0 = 0, d1n = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = ctl_.abs_tol + ctl_.rel_tol * std::abs(y_[i]);
      d0 += (y_[i] / sc) * (y_[i] / sc);
      d1n += (k_[0][i] / sc) * (k_[0][i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1n = std::sqrt(d1n / N);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min({h0, ctl_.max_step, std::abs(t_end - t_)});
    State y1, f1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h0 * k_[0][i];
    rhs(t_ + h0, y1, f1);
    ++stats_.rhs_evals;
    double d2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = ctl_.abs_tol + ctl_.rel_tol * std::abs(y_[i]);
      d2 += ((f1[i] - k_[0][i]) / sc) * ((f1[i] - k_[0][i]) / sc);
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dmax = std::max(d1n, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100 * h0, h1, ctl_.max_step});
  }

  StepControl ctl_;
  double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0, fac_old_ = 1e-4;
  State y_{}, y_prev_{};
  std::array<State, 7> k_{};
  std::array<State, 5> rcont_{};
  IntegratorStats stats_;
};

}  // namespace dmltwin::ode
