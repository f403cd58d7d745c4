// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "dmltwin/autodiff/tensor.hpp"

namespace dmltwin::ad::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::ArrayXd>;
using ConstVecMap = Eigen::Map<const Eigen::ArrayXd>;

inline ConstMatMap mat(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
  return ConstMatMap(t.values().data(), rows, cols);
}
inline MatMap mat(Tensor& t, Eigen::Index rows, Eigen::Index cols) { return MatMap(t.values().data(), rows, cols); }
inline MatMap grad_mat(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
  return MatMap(t.grad_buffer().data(), rows, cols);
}
inline ConstMatMap out_grad_mat(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
  return ConstMatMap(t.grad().data(), rows, cols);
}
inline ConstVecMap vec(const Tensor& t) {
  return ConstVecMap(t.values().data(), static_cast<Eigen::Index>(t.size()));
}
inline VecMap vec(Tensor& t) { return VecMap(t.values().data(), static_cast<Eigen::Index>(t.size())); }
inline VecMap grad_vec(const Tensor& t) {
  return VecMap(t.grad_buffer().data(), static_cast<Eigen::Index>(t.size()));
}
inline ConstVecMap out_grad_vec(const Tensor& t) {
  return ConstVecMap(t.grad().data(), static_cast<Eigen::Index>(t.size()));
}

}  // namespace dmltwin::ad::detail
