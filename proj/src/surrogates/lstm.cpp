// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Stacked LSTM, zero initial state, linear head at every step. Gate blocks in
// the weight columns are ordered input, forget, candidate, output.

#include "dmltwin/surrogates/model.hpp"

namespace dmltwin::surrogate {

ad::Tensor lstm_forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x) {
  const auto B = x.dim(0), T = x.dim(1);
  const auto H = static_cast<std::size_t>(m.hyper.hidden_nodes);
  const auto L = static_cast<std::size_t>(m.hyper.hidden_layers);

  std::vector<const ad::Tensor*> w(L), u(L), b(L);
  for (std::size_t l = 0; l < L; ++l) {
    const std::string p = "l" + std::to_string(l) + ".";
    w[l] = &m.param(p + "w");
    u[l] = &m.param(p + "u");
    b[l] = &m.param(p + "b");
  }

  // First-layer input projection for all steps at once; rows are ordered (t, b).
  const auto xt = ad::reshape(tape, ad::transpose(tape, x), {T * B, 1});
  const auto z0 = ad::add_rowwise(tape, ad::matmul(tape, xt, *w[0]), *b[0]);

  std::vector<ad::Tensor> h(L), c(L);
  std::vector<ad::Tensor> top;
  top.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      ad::Tensor g = l == 0 ? ad::slice_rows(tape, z0, t * B, (t + 1) * B)
                            : ad::add_rowwise(tape, ad::matmul(tape, h[l - 1], *w[l]), *b[l]);
      if (t > 0) g = ad::add(tape, g, ad::matmul(tape, h[l], *u[l]));
      const auto ig = ad::sigmoid(tape, ad::slice_cols(tape, g, 0, H));
      const auto cand = ad::tanh(tape, ad::slice_cols(tape, g, 2 * H, 3 * H));
      const auto og = ad::sigmoid(tape, ad::slice_cols(tape, g, 3 * H, 4 * H));
      if (t > 0) {
        const auto fg = ad::sigmoid(tape, ad::slice_cols(tape, g, H, 2 * H));
        c[l] = ad::add(tape, ad::mul(tape, fg, c[l]), ad::mul(tape, ig, cand));
      } else {
        c[l] = ad::mul(tape, ig, cand);
      }
      h[l] = ad::mul(tape, og, ad::tanh(tape, c[l]));
    }
    top.push_back(h[L - 1]);
  }

  // [B x T*H] row-major equals [B*T x H] with rows ordered (b, t).
  const auto hs = ad::reshape(tape, ad::concat_cols(tape, top), {B * T, H});
  const auto y = ad::add_rowwise(tape, ad::matmul(tape, hs, m.param("head.w")), m.param("head.b"));
  return ad::reshape(tape, y, {B, T});
}

}  // namespace dmltwin::surrogate
