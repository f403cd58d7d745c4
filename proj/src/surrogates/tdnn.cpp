// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Time-delay network: a causal window of the input feeds one ReLU layer and a
// linear output unit, shared across time.

#include "dmltwin/surrogates/model.hpp"

namespace dmltwin::surrogate {

ad::Tensor tdnn_forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x) {
  const auto B = x.dim(0), T = x.dim(1);
  const auto window = ad::lag_matrix(tape, x, static_cast<std::size_t>(m.hyper.conv_window));
  const auto h = ad::relu(tape, ad::add_rowwise(tape, ad::matmul(tape, window, m.param("w1")), m.param("b1")));
  const auto y = ad::add_rowwise(tape, ad::matmul(tape, h, m.param("w2")), m.param("b2"));
  return ad::reshape(tape, y, {B, T});
}

}  // namespace dmltwin::surrogate
