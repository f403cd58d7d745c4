// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/autodiff/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "dmltwin/errors.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace dmltwin::ad {

namespace {

// Activations are large and short-lived. Keeping them on the heap instead of
// fresh mmap regions avoids a page fault per 4 KiB on every op.
[[maybe_unused]] const bool kHeapTuned = [] {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  return true;
}();

}  // namespace

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape) : data_(std::make_shared<detail::TensorData>()) {
  for (auto d : shape) {
    if (d == 0) throw ParameterError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  data_->value.assign(shape_size(shape), 0.0);
  data_->shape = std::move(shape);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  Tensor t(std::move(shape));
  t.data_->requires_grad = requires_grad;
  return t;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : data_(std::make_shared<detail::TensorData>()) {
  for (auto d : shape) {
    if (d == 0) throw ParameterError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (shape_size(shape) != values.size()) {
    throw DimensionError("shape " + shape_str(shape) + " needs " + std::to_string(shape_size(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  data_->shape = std::move(shape);
  data_->value.assign(values.begin(), values.end());
  data_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor(Shape{}, {value}, requires_grad); }

const Shape& Tensor::shape() const {
  if (!data_) throw ContractError("use of undefined tensor");
  return data_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  return s[axis];
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("expected a matrix, got " + shape_str(shape()));
  return data_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("expected a matrix, got " + shape_str(shape()));
  return data_->shape[1];
}

std::span<double> Tensor::values() {
  if (!data_) throw ContractError("use of undefined tensor");
  return data_->value;
}

std::span<const double> Tensor::values() const {
  if (!data_) throw ContractError("use of undefined tensor");
  return data_->value;
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() needs a single-element tensor, got " + shape_str(shape()));
  return data_->value[0];
}

bool Tensor::requires_grad() const { return data_ && data_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (!data_) throw ContractError("use of undefined tensor");
  data_->requires_grad = flag;
}

bool Tensor::has_grad() const { return data_ && !data_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw ContractError("tensor " + shape_str(shape()) + " has no gradient");
  return data_->grad;
}

std::span<double> Tensor::grad_buffer() const {
  if (!data_) throw ContractError("use of undefined tensor");
  if (data_->grad.empty()) data_->grad.assign(data_->value.size(), 0.0);
  return data_->grad;
}

void Tensor::zero_grad() const {
  if (data_ && !data_->grad.empty()) std::fill(data_->grad.begin(), data_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  Tensor t(shape());
  t.data_->value = data_->value;
  return t;
}

}  // namespace dmltwin::ad
