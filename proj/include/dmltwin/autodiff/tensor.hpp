// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major 64-bit tensors. A Tensor is a shared handle: copies alias the
// same storage, which is what lets the tape route gradients back to parameters.

#pragma once

#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace dmltwin::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

/// 64-byte aligned storage. Vectorised reductions peel a prefix that depends
/// on the buffer address, so a fixed alignment keeps results bit-reproducible.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

namespace detail {
struct TensorData {
  Shape shape;
  Buffer value;
  Buffer grad;  // empty until something accumulates into it
  bool requires_grad = false;
};
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor.
  explicit Tensor(Shape shape);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  /// Rank-0 tensor holding one value.
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return data_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const { return values().size(); }
  std::size_t dim(std::size_t axis) const;
  bool is_scalar() const { return defined() && rank() == 0; }

  /// Row/column counts of a rank-2 tensor.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> values();
  std::span<const double> values() const;
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  bool has_grad() const;
  std::span<const double> grad() const;
  /// Gradient buffer, zero-allocated on first use.
  std::span<double> grad_buffer() const;
  void zero_grad() const;

  bool same_storage(const Tensor& other) const noexcept { return data_ == other.data_; }
  const void* id() const noexcept { return data_.get(); }

  /// Deep copy of shape and values; the copy carries no gradient.
  Tensor clone() const;

 private:
  std::shared_ptr<detail::TensorData> data_;
};

}  // namespace dmltwin::ad
