// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Second-order Volterra filter:
//   y[t] = h0 + sum_i h1[i] x[t-i] + sum_{i<=j} h2[i,j] x[t-i] x[t-j]

#include "dmltwin/surrogates/model.hpp"

namespace dmltwin::surrogate {

ad::Tensor volterra_forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x) {
  const auto B = x.dim(0), T = x.dim(1);
  const auto lag = ad::lag_matrix(tape, x, static_cast<std::size_t>(m.hyper.memory));
  const auto lin = ad::matmul(tape, lag, m.param("h1"));
  const auto quad = ad::matmul(tape, ad::pair_products(tape, lag), m.param("h2"));
  const auto y = ad::add(tape, ad::add(tape, lin, quad), m.param("h0"));
  return ad::reshape(tape, y, {B, T});
}

}  // namespace dmltwin::surrogate
