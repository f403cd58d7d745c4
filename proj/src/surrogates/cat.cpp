// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Convolutional attention transformer (decoder only, pre-norm). Queries and
// keys come from causal convolutions of the layer input, values from a
// position-wise map.

#include <cmath>

#include "dmltwin/errors.hpp"
#include "dmltwin/surrogates/model.hpp"

namespace dmltwin::surrogate {

namespace {

ad::Tensor linear(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x, const std::string& name) {
  return ad::add_rowwise(tape, ad::matmul(tape, x, m.param(name + ".w")), m.param(name + ".b"));
}

ad::Tensor conv(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x, const std::string& name) {
  return ad::conv1d_causal(tape, x, m.param(name + ".w"), m.param(name + ".b"));
}

ad::Tensor norm(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x, const std::string& name) {
  return ad::layer_norm(tape, x, m.param(name + ".g"), m.param(name + ".b"));
}

ad::Tensor cat_sequence(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x, AttentionTrace* trace) {
  const auto& hp = m.hyper;
  const std::size_t T = x.dim(0);
  const auto E = static_cast<std::size_t>(hp.embed_dim);
  const auto heads = static_cast<std::size_t>(hp.n_heads);
  const std::size_t dh = E / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  auto X = ad::add(tape, conv(tape, m, x, "embed"), ad::slice_rows(tape, m.param("pos"), 0, T));
  if (trace) trace->weights.assign(static_cast<std::size_t>(hp.hidden_layers), {});

  for (int l = 0; l < hp.hidden_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const auto h = norm(tape, m, X, p + "ln1");
    const auto q = conv(tape, m, h, p + "q");
    const auto k = conv(tape, m, h, p + "k");
    const auto v = linear(tape, m, h, p + "v");
    std::vector<ad::Tensor> outs;
    for (std::size_t j = 0; j < heads; ++j) {
      std::vector<double>* w = nullptr;
      if (trace) w = &trace->weights[static_cast<std::size_t>(l)].emplace_back();
      const auto lo = j * dh, hi = (j + 1) * dh;
      outs.push_back(ad::causal_attention(tape, ad::slice_cols(tape, q, lo, hi), ad::slice_cols(tape, k, lo, hi),
                                          ad::slice_cols(tape, v, lo, hi), scale, w));
    }
    const auto att = heads == 1 ? outs[0] : ad::concat_cols(tape, outs);
    X = ad::add(tape, X, linear(tape, m, att, p + "o"));

    const auto h2 = norm(tape, m, X, p + "ln2");
    const auto mid = ad::relu(tape, linear(tape, m, h2, p + "mlp1"));
    X = ad::add(tape, X, linear(tape, m, mid, p + "mlp2"));
  }
  return linear(tape, m, norm(tape, m, X, "final_ln"), "head");
}

}  // namespace

ad::Tensor cat_forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x, AttentionTrace* trace) {
  const auto B = x.dim(0), T = x.dim(1);
  if (T > static_cast<std::size_t>(m.hyper.max_len)) {
    throw ContractError("cat_forward: sequence length " + std::to_string(T) + " exceeds the positional table (" +
                        std::to_string(m.hyper.max_len) + ")");
  }
  if (B == 1) {
    const auto y = cat_sequence(tape, m, ad::reshape(tape, x, {T, 1}), trace);
    return ad::reshape(tape, y, {1, T});
  }
  std::vector<ad::Tensor> cols;
  cols.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto xb = ad::reshape(tape, ad::slice_rows(tape, x, b, b + 1), {T, 1});
    cols.push_back(cat_sequence(tape, m, xb, nullptr));
  }
  return ad::transpose(tape, ad::concat_cols(tape, cols));
}

}  // namespace dmltwin::surrogate
