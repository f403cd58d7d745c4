// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable operations. Every op takes the tape first; when the tape is
// not recording, or no input requires grad, the op runs forward only.
//
// Binary elementwise ops require equal shapes. The only implicit broadcast is
// a rank-0 scalar against a tensor. Row-wise bias addition is its own op.

#pragma once

#include <cstddef>
#include <vector>

#include "dmltwin/autodiff/tape.hpp"
#include "dmltwin/autodiff/tensor.hpp"

namespace dmltwin::ad {

enum class Unary { relu, sigmoid, tanh, square, sqrt };  // sqrt: DomainError below 0
enum class Binary { add, sub, mul };

Tensor elementwise(Tape& tape, Unary kind, const Tensor& x);
Tensor elementwise(Tape& tape, Binary kind, const Tensor& a, const Tensor& b);

inline Tensor relu(Tape& t, const Tensor& x) { return elementwise(t, Unary::relu, x); }
inline Tensor sigmoid(Tape& t, const Tensor& x) { return elementwise(t, Unary::sigmoid, x); }
inline Tensor tanh(Tape& t, const Tensor& x) { return elementwise(t, Unary::tanh, x); }
inline Tensor square(Tape& t, const Tensor& x) { return elementwise(t, Unary::square, x); }
inline Tensor sqrt(Tape& t, const Tensor& x) { return elementwise(t, Unary::sqrt, x); }
inline Tensor add(Tape& t, const Tensor& a, const Tensor& b) { return elementwise(t, Binary::add, a, b); }
inline Tensor sub(Tape& t, const Tensor& a, const Tensor& b) { return elementwise(t, Binary::sub, a, b); }
inline Tensor mul(Tape& t, const Tensor& a, const Tensor& b) { return elementwise(t, Binary::mul, a, b); }

/// x * c for a constant c.
Tensor scale(Tape& tape, const Tensor& x, double c);

/// [m x k] . [k x n] -> [m x n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor transpose(Tape& tape, const Tensor& x);

/// x[m x n] + bias[n] added to every row.
Tensor add_rowwise(Tape& tape, const Tensor& x, const Tensor& bias);

Tensor reduce_mean(Tape& tape, const Tensor& x);
Tensor reduce_sum(Tape& tape, const Tensor& x);

/// Softmax over the last dimension, max-subtracted per slice.
Tensor softmax_lastdim(Tape& tape, const Tensor& x);

/// Causal 1-D convolution. x[T x Cin], kernel[K x Cin x Cout], bias[Cout].
/// y[t,o] = bias[o] + sum_{k,c} kernel[k,c,o] * x[t-K+1+k, c], x outside [0,T) is 0.
Tensor conv1d_causal(Tape& tape, const Tensor& x, const Tensor& kernel, const Tensor& bias);

/// Per-row layer normalisation with affine gain/shift of length n.
Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gain, const Tensor& shift, double eps = 1e-5);

Tensor slice_cols(Tape& tape, const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_rows(Tape& tape, const Tensor& x, std::size_t begin, std::size_t end);
Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts);
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);

/// Tapped delay line. x[B x T] -> [B*T x M], row (b*T + t), column i holds
/// x[b, t-i] (zero before the start of the row).
Tensor lag_matrix(Tape& tape, const Tensor& x, std::size_t memory);

/// Upper-triangular pairwise products of each row: x[R x M] -> [R x M(M+1)/2],
/// columns ordered (0,0),(0,1),...,(0,M-1),(1,1),...,(M-1,M-1).
Tensor pair_products(Tape& tape, const Tensor& x);
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t memory);

/// Single-head causal scaled dot-product attention.
/// out[t] = sum_{u<=t} softmax_u(scale * q[t].k[u]) v[u]; q,k,v are [T x d].
/// When `weights` is non-null it receives the row-major [T x T] attention
/// matrix (zeros above the diagonal).
Tensor causal_attention(Tape& tape, const Tensor& q, const Tensor& k, const Tensor& v, double scale,
                        std::vector<double>* weights = nullptr);

}  // namespace dmltwin::ad
