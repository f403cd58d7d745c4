// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference check of tape gradients.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dmltwin/autodiff/tape.hpp"
#include "dmltwin/autodiff/tensor.hpp"

namespace dmltwin::ad {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Scalar-valued function of the checked tensors, evaluated on the given tape.
using ScalarFn = std::function<Tensor(Tape&)>;

struct GradcheckOptions {
  double tol = 1e-6;
  /// Finite-difference step is step_scale * max(1, |theta|).
  double step_scale = 1e-6;
  /// Entries checked per tensor; 0 checks every entry.
  std::size_t samples_per_tensor = 0;
  std::uint64_t seed = 0;
  /// Lower bound on the relative-error denominator, so entries whose true
  /// gradient is at round-off level do not dominate the report.
  double denominator_floor = 1e-8;
  /// Richardson-combine steps h and 2h, cancelling the h^2 error term so a
  /// larger step (less round-off) can be used.
  bool extrapolate = false;
};

struct GradcheckEntry {
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  bool passed = false;
  std::vector<GradcheckEntry> entries;
};

/// Compares the tape gradient of f with central differences. Throws
/// ContractError if two forward evaluations of f disagree.
GradcheckReport gradcheck(const ScalarFn& f, std::vector<NamedTensor> params, const GradcheckOptions& opts = {});
GradcheckReport gradcheck(const ScalarFn& f, Tensor theta, const GradcheckOptions& opts = {});

}  // namespace dmltwin::ad
