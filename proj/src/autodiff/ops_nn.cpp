// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sequence-model ops: softmax, causal convolution, layer norm, tapped delay
// lines, pairwise products and causal attention.

#include <algorithm>
#include <cmath>
#include <limits>

#include "dmltwin/autodiff/ops.hpp"
#include "dmltwin/errors.hpp"
#include "eigen_maps.hpp"

namespace dmltwin::ad {

using detail::grad_mat;
using detail::mat;
using detail::out_grad_mat;
using detail::RowMat;

Tensor softmax_lastdim(Tape& tape, const Tensor& x) {
  if (x.rank() == 0) throw DimensionError("softmax_lastdim: needs at least one dimension");
  const auto n = static_cast<Eigen::Index>(x.shape().back());
  const auto rows = static_cast<Eigen::Index>(x.size()) / n;
  Tensor out(x.shape());
  auto xm = mat(x, rows, n);
  auto ym = mat(out, rows, n);
  ym = (xm.colwise() - xm.rowwise().maxCoeff()).array().exp().matrix();
  ym.array().colwise() /= ym.rowwise().sum().array();
  if (tape.tracks({&x})) {
    tape.record("softmax_lastdim", {x}, out, [x, out, rows, n]() mutable {
      auto g = out_grad_mat(out, rows, n).array();
      auto y = mat(std::as_const(out), rows, n).array();
      Eigen::ArrayXd dot = (g * y).rowwise().sum();
      grad_mat(x, rows, n).array() += y * (g.colwise() - dot);
    });
  }
  return out;
}

Tensor conv1d_causal(Tape& tape, const Tensor& x, const Tensor& kernel, const Tensor& bias) {
  if (kernel.rank() != 3) throw ParameterError("conv1d_causal: kernel must be [K x Cin x Cout], got " + shape_str(kernel.shape()));
  if (x.rank() != 2) throw DimensionError("conv1d_causal: input must be [T x Cin], got " + shape_str(x.shape()));
  const std::size_t taps = kernel.dim(0);
  const auto cin = static_cast<Eigen::Index>(kernel.dim(1));
  const auto cout = static_cast<Eigen::Index>(kernel.dim(2));
  if (x.cols() != kernel.dim(1)) {
    throw DimensionError("conv1d_causal: input " + shape_str(x.shape()) + " vs kernel " + shape_str(kernel.shape()));
  }
  if (bias.rank() != 1 || bias.dim(0) != kernel.dim(2)) {
    throw DimensionError("conv1d_causal: bias " + shape_str(bias.shape()) + " vs kernel " + shape_str(kernel.shape()));
  }
  const auto steps = static_cast<Eigen::Index>(x.rows());
  Tensor out(Shape{x.rows(), kernel.dim(2)});
  auto y = mat(out, steps, cout);
  auto xm = mat(x, steps, cin);
  y.rowwise() = Eigen::Map<const Eigen::RowVectorXd>(bias.values().data(), cout);
  // Tap k multiplies the input delayed by K-1-k samples.
  for (std::size_t k = 0; k < taps; ++k) {
    const auto shift = static_cast<Eigen::Index>(taps - 1 - k);
    if (shift >= steps) continue;
    auto wk = detail::ConstMatMap(kernel.values().data() + k * cin * cout, cin, cout);
    y.bottomRows(steps - shift).noalias() += xm.topRows(steps - shift) * wk;
  }
  if (tape.tracks({&x, &kernel, &bias})) {
    tape.record("conv1d_causal", {x, kernel, bias}, out, [x, kernel, bias, out, taps, cin, cout, steps]() mutable {
      auto g = out_grad_mat(out, steps, cout);
      if (bias.requires_grad()) {
        Eigen::Map<Eigen::RowVectorXd>(bias.grad_buffer().data(), cout) += g.colwise().sum();
      }
      auto xm = mat(std::as_const(x), steps, cin);
      for (std::size_t k = 0; k < taps; ++k) {
        const auto shift = static_cast<Eigen::Index>(taps - 1 - k);
        if (shift >= steps) continue;
        const auto len = steps - shift;
        if (kernel.requires_grad()) {
          detail::MatMap gw(kernel.grad_buffer().data() + k * cin * cout, cin, cout);
          gw.noalias() += xm.topRows(len).transpose() * g.bottomRows(len);
        }
        if (x.requires_grad()) {
          auto wk = detail::ConstMatMap(kernel.values().data() + k * cin * cout, cin, cout);
          grad_mat(x, steps, cin).topRows(len).noalias() += g.bottomRows(len) * wk.transpose();
        }
      }
    });
  }
  return out;
}

Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  if (x.rank() != 2) throw DimensionError("layer_norm: expected a matrix, got " + shape_str(x.shape()));
  const auto rows = static_cast<Eigen::Index>(x.rows());
  const auto n = static_cast<Eigen::Index>(x.cols());
  if (gain.size() != x.cols() || shift.size() != x.cols()) {
    throw DimensionError("layer_norm: gain/shift must have " + std::to_string(n) + " entries");
  }
  auto xa = mat(x, rows, n).array();
  Eigen::ArrayXd mean = xa.rowwise().mean();
  RowMat xhat = (xa.colwise() - mean).matrix();
  Eigen::ArrayXd inv_std = (xhat.array().square().rowwise().mean() + eps).rsqrt();
  xhat.array().colwise() *= inv_std;

  Tensor out(x.shape());
  Eigen::Map<const Eigen::RowVectorXd> gv(gain.values().data(), n);
  Eigen::Map<const Eigen::RowVectorXd> sv(shift.values().data(), n);
  mat(out, rows, n) = (xhat.array().rowwise() * gv.array()).rowwise() + sv.array();

  if (tape.tracks({&x, &gain, &shift})) {
    tape.record("layer_norm", {x, gain, shift}, out,
                [x, gain, shift, out, rows, n, xhat = std::move(xhat), inv_std = std::move(inv_std)]() mutable {
                  auto g = out_grad_mat(out, rows, n).array();
                  if (gain.requires_grad()) {
                    Eigen::Map<Eigen::RowVectorXd>(gain.grad_buffer().data(), n) +=
                        (g * xhat.array()).colwise().sum().matrix();
                  }
                  if (shift.requires_grad()) {
                    Eigen::Map<Eigen::RowVectorXd>(shift.grad_buffer().data(), n) += g.colwise().sum().matrix();
                  }
                  if (x.requires_grad()) {
                    Eigen::Map<const Eigen::RowVectorXd> gv(gain.values().data(), n);
                    Eigen::ArrayXXd dxhat = g.rowwise() * gv.array();
                    Eigen::ArrayXd mean_d = dxhat.rowwise().mean();
                    Eigen::ArrayXd mean_dx = (dxhat * xhat.array()).rowwise().mean();
                    Eigen::ArrayXXd dx = (dxhat.colwise() - mean_d) - (xhat.array().colwise() * mean_dx);
                    dx.colwise() *= inv_std;
                    grad_mat(x, rows, n).array() += dx;
                  }
                });
  }
  return out;
}

Tensor lag_matrix(Tape& tape, const Tensor& x, std::size_t memory) {
  if (x.rank() != 2) throw DimensionError("lag_matrix: expected [B x T], got " + shape_str(x.shape()));
  if (memory == 0) throw ParameterError("lag_matrix: memory must be positive");
  const std::size_t batch = x.rows();
  const std::size_t steps = x.cols();
  Tensor out(Shape{batch * steps, memory});
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      double* row = ov.data() + (b * steps + t) * memory;
      const std::size_t avail = std::min(memory, t + 1);
      for (std::size_t i = 0; i < avail; ++i) row[i] = xv[b * steps + t - i];
    }
  }
  if (tape.tracks({&x})) {
    tape.record("lag_matrix", {x}, out, [x, out, batch, steps, memory]() mutable {
      auto g = out.grad();
      auto gx = x.grad_buffer();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < steps; ++t) {
          const double* row = g.data() + (b * steps + t) * memory;
          const std::size_t avail = std::min(memory, t + 1);
          for (std::size_t i = 0; i < avail; ++i) gx[b * steps + t - i] += row[i];
        }
      }
    });
  }
  return out;
}

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t memory) {
  if (i > j) std::swap(i, j);
  return i * memory - i * (i - 1) / 2 + (j - i);
}

Tensor pair_products(Tape& tape, const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("pair_products: expected a matrix, got " + shape_str(x.shape()));
  const std::size_t rows = x.rows();
  const std::size_t m = x.cols();
  const std::size_t p = m * (m + 1) / 2;
  Tensor out(Shape{rows, p});
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * m;
    double* o = ov.data() + r * p;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) *o++ = xr[i] * xr[j];
    }
  }
  if (tape.tracks({&x})) {
    tape.record("pair_products", {x}, out, [x, out, rows, m, p]() mutable {
      auto g = out.grad();
      auto xv = std::as_const(x).values();
      auto gx = x.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = xv.data() + r * m;
        double* gr = gx.data() + r * m;
        const double* go = g.data() + r * p;
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = i; j < m; ++j) {
            const double d = *go++;
            gr[i] += d * xr[j];
            gr[j] += d * xr[i];
          }
        }
      }
    });
  }
  return out;
}

namespace {
constexpr Eigen::Index kAttentionBlock = 64;
}

Tensor causal_attention(Tape& tape, const Tensor& q, const Tensor& k, const Tensor& v, double scale,
                        std::vector<double>* weights) {
  if (q.rank() != 2 || k.shape() != q.shape() || v.rank() != 2 || v.rows() != q.rows()) {
    throw DimensionError("causal_attention: q " + shape_str(q.shape()) + ", k " + shape_str(k.shape()) + ", v " +
                         shape_str(v.shape()));
  }
  const auto steps = static_cast<Eigen::Index>(q.rows());
  const auto dk = static_cast<Eigen::Index>(q.cols());
  const auto dv = static_cast<Eigen::Index>(v.cols());
  auto qm = mat(q, steps, dk);
  auto km = mat(k, steps, dk);
  auto vm = mat(v, steps, dv);
  Tensor out(Shape{q.rows(), v.cols()});
  auto om = mat(out, steps, dv);

  // Query block [r0, r1) only sees keys [0, r1); the diagonal block is masked.
  // Each block keeps exp(scale * (s - rowmax)) unnormalised plus 1/rowsum.
  struct Block {
    RowMat e;
    Eigen::VectorXd inv_sum;
  };
  std::vector<Block> blocks;
  for (Eigen::Index r0 = 0; r0 < steps; r0 += kAttentionBlock) {
    const Eigen::Index r1 = std::min(steps, r0 + kAttentionBlock);
    const Eigen::Index nb = r1 - r0;
    Block b{RowMat(nb, r1), Eigen::VectorXd(nb)};
    b.e.noalias() = qm.middleRows(r0, nb) * km.topRows(r1).transpose();
    for (Eigen::Index i = 0; i < nb; ++i) {
      const Eigen::Index valid = r0 + i + 1;
      auto row = b.e.row(i);
      const double mx = row.head(valid).maxCoeff();
      row.head(valid) = ((row.head(valid).array() - mx) * scale).exp().matrix();
      row.tail(r1 - valid).setZero();
      b.inv_sum[i] = 1.0 / row.head(valid).sum();
    }
    om.middleRows(r0, nb).noalias() = b.inv_sum.asDiagonal() * (b.e * vm.topRows(r1));
    blocks.push_back(std::move(b));
  }
  if (weights) {
    weights->assign(static_cast<std::size_t>(steps * steps), 0.0);
    Eigen::Index r0 = 0;
    for (const auto& b : blocks) {
      for (Eigen::Index i = 0; i < b.e.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.e.cols(); ++j) (*weights)[(r0 + i) * steps + j] = b.e(i, j) * b.inv_sum[i];
      }
      r0 += b.e.rows();
    }
  }

  if (tape.tracks({&q, &k, &v})) {
    tape.record("causal_attention", {q, k, v}, out,
                [q, k, v, out, steps, dk, dv, scale, blocks = std::move(blocks)]() mutable {
                  auto g = out_grad_mat(out, steps, dv);
                  auto qm = mat(std::as_const(q), steps, dk);
                  auto km = mat(std::as_const(k), steps, dk);
                  auto vm = mat(std::as_const(v), steps, dv);
                  RowMat gq = RowMat::Zero(steps, dk);
                  RowMat gk = RowMat::Zero(steps, dk);
                  RowMat gv = RowMat::Zero(steps, dv);
                  Eigen::Index r0 = 0;
                  for (auto& b : blocks) {
                    const Eigen::Index nb = b.e.rows();
                    const Eigen::Index r1 = b.e.cols();
                    // With P = diag(1/l) E:  dV += P^T dO,  dS = P o (dP - rowdot(dP, P)).
                    const RowMat go = b.inv_sum.asDiagonal() * g.middleRows(r0, nb);
                    gv.topRows(r1).noalias() += b.e.transpose() * go;
                    RowMat ds(nb, r1);
                    ds.noalias() = go * vm.topRows(r1).transpose();
                    const Eigen::ArrayXd dot = (ds.array() * b.e.array()).rowwise().sum() * b.inv_sum.array();
                    ds.array() = b.e.array() * (ds.array().colwise() - dot) * scale;
                    gq.middleRows(r0, nb).noalias() += ds * km.topRows(r1);
                    gk.topRows(r1).noalias() += ds.transpose() * qm.middleRows(r0, nb);
                    r0 += nb;
                  }
                  if (q.requires_grad()) grad_mat(q, steps, dk) += gq;
                  if (k.requires_grad()) grad_mat(k, steps, dk) += gk;
                  if (v.requires_grad()) grad_mat(v, steps, dv) += gv;
                });
  }
  return out;
}

}  // namespace dmltwin::ad
