// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared by every module.

#pragma once

#include <stdexcept>
#include <string>

namespace dmltwin {

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configuration value or argument is out of range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an API precondition (non-scalar loss, non-deterministic function, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numerical procedure failed (no convergence, step underflow, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested quantity is undefined at this operating point.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Reading or writing a file failed, or its content is malformed.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dmltwin
