// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/autodiff/gradcheck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "dmltwin/errors.hpp"

namespace dmltwin::ad {

namespace {

double evaluate(const ScalarFn& f) {
  Tape tape = Tape::no_grad();
  Tensor y = f(tape);
  if (y.size() != 1) throw ContractError("gradcheck: function must return a scalar, got " + shape_str(y.shape()));
  return y.item();
}

}  // namespace

GradcheckReport gradcheck(const ScalarFn& f, std::vector<NamedTensor> params, const GradcheckOptions& opts) {
  const double f0 = evaluate(f);
  const double f0_again = evaluate(f);
  if (std::bit_cast<std::uint64_t>(f0) != std::bit_cast<std::uint64_t>(f0_again)) {
    throw ContractError("gradcheck: function is not deterministic (" + std::to_string(f0) + " vs " +
                        std::to_string(f0_again) + ")");
  }

  for (auto& p : params) {
    p.tensor.set_requires_grad(true);
    p.tensor.zero_grad();
  }
  {
    Tape tape;
    Tensor loss = f(tape);
    backward(loss, tape);
  }

  GradcheckReport report;
  std::mt19937_64 rng(opts.seed);
  for (auto& p : params) {
    const std::size_t n = p.tensor.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (opts.samples_per_tensor && opts.samples_per_tensor < n) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(opts.samples_per_tensor);
      std::sort(idx.begin(), idx.end());
    }
    const std::vector<double> analytic = p.tensor.has_grad()
                                             ? std::vector<double>(p.tensor.grad().begin(), p.tensor.grad().end())
                                             : std::vector<double>(n, 0.0);
    auto values = p.tensor.values();
    for (std::size_t i : idx) {
      const double theta = values[i];
      const double h = opts.step_scale * std::max(1.0, std::abs(theta));
      auto central = [&](double step) {
        values[i] = theta + step;
        const double up = evaluate(f);
        values[i] = theta - step;
        const double down = evaluate(f);
        values[i] = theta;
        return (up - down) / (2.0 * step);
      };
      const double d1 = central(h);
      const double numeric = opts.extrapolate ? (4.0 * d1 - central(2.0 * h)) / 3.0 : d1;
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.denominator_floor});
      const double rel = std::abs(a - numeric) / denom;
      report.entries.push_back({p.name, i, a, numeric, rel});
      report.max_rel_error = std::max(report.max_rel_error, rel);
    }
  }
  report.passed = report.max_rel_error <= opts.tol;
  return report;
}

GradcheckReport gradcheck(const ScalarFn& f, Tensor theta, const GradcheckOptions& opts) {
  return gradcheck(f, std::vector<NamedTensor>{{"theta", std::move(theta)}}, opts);
}

}  // namespace dmltwin::ad
