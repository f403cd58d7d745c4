// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Elementwise, reduction, matrix and reshaping ops.

#include <algorithm>
#include <cmath>

#include "dmltwin/autodiff/ops.hpp"
#include "dmltwin/errors.hpp"
#include "eigen_maps.hpp"

namespace dmltwin::ad {

using detail::ConstMatMap;
using detail::grad_mat;
using detail::grad_vec;
using detail::mat;
using detail::out_grad_mat;
using detail::out_grad_vec;
using detail::vec;

namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(t.shape()));
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor elementwise(Tape& tape, Unary kind, const Tensor& x) {
  Tensor out(x.shape());
  auto xv = vec(x);
  auto yv = vec(out);
  switch (kind) {
    case Unary::relu: yv = xv.max(0.0); break;
    case Unary::sigmoid:
      for (Eigen::Index i = 0; i < xv.size(); ++i) yv[i] = stable_sigmoid(xv[i]);
      break;
    case Unary::tanh: yv = xv.tanh(); break;
    case Unary::square: yv = xv.square(); break;
    case Unary::sqrt:
      if ((xv < 0.0).any()) throw DomainError("sqrt: negative input");
      yv = xv.sqrt();
      break;
  }
  if (tape.tracks({&x})) {
    tape.record("elementwise", {x}, out, [x, out, kind]() mutable {
      auto g = out_grad_vec(out);
      auto gx = grad_vec(x);
      auto xv = vec(std::as_const(x));
      auto yv = vec(std::as_const(out));
      switch (kind) {
        // Subgradient 0 at exactly 0.
        case Unary::relu: gx += (xv > 0.0).select(g, 0.0); break;
        case Unary::sigmoid: gx += g * yv * (1.0 - yv); break;
        case Unary::tanh: gx += g * (1.0 - yv.square()); break;
        case Unary::square: gx += 2.0 * g * xv; break;
        case Unary::sqrt: gx += 0.5 * g / yv; break;
      }
    });
  }
  return out;
}

Tensor elementwise(Tape& tape, Binary kind, const Tensor& a, const Tensor& b) {
  const bool a_scalar = a.is_scalar() && !b.is_scalar();
  const bool b_scalar = b.is_scalar() && !a.is_scalar();
  if (!a_scalar && !b_scalar && a.shape() != b.shape()) {
    throw DimensionError("elementwise: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const Tensor& full = a_scalar ? b : a;
  Tensor out(full.shape());
  auto yv = vec(out);
  if (a_scalar) {
    const double s = a.item();
    auto bv = vec(b);
    switch (kind) {
      case Binary::add: yv = s + bv; break;
      case Binary::sub: yv = s - bv; break;
      case Binary::mul: yv = s * bv; break;
    }
  } else if (b_scalar) {
    const double s = b.item();
    auto av = vec(a);
    switch (kind) {
      case Binary::add: yv = av + s; break;
      case Binary::sub: yv = av - s; break;
      case Binary::mul: yv = av * s; break;
    }
  } else {
    auto av = vec(a);
    auto bv = vec(b);
    switch (kind) {
      case Binary::add: yv = av + bv; break;
      case Binary::sub: yv = av - bv; break;
      case Binary::mul: yv = av * bv; break;
    }
  }
  if (tape.tracks({&a, &b})) {
    tape.record("elementwise", {a, b}, out, [a, b, out, kind, a_scalar, b_scalar]() mutable {
      auto g = out_grad_vec(out);
      const double sign_b = kind == Binary::sub ? -1.0 : 1.0;
      if (a.requires_grad()) {
        if (a_scalar) {
          a.grad_buffer()[0] += kind == Binary::mul ? (g * vec(std::as_const(b))).sum() : g.sum();
        } else if (kind == Binary::mul) {
          if (b_scalar) grad_vec(a) += g * b.item();
          else grad_vec(a) += g * vec(std::as_const(b));
        } else {
          grad_vec(a) += g;
        }
      }
      if (b.requires_grad()) {
        if (b_scalar) {
          b.grad_buffer()[0] += kind == Binary::mul ? (g * vec(std::as_const(a))).sum() : sign_b * g.sum();
        } else if (kind == Binary::mul) {
          if (a_scalar) grad_vec(b) += g * a.item();
          else grad_vec(b) += g * vec(std::as_const(a));
        } else {
          grad_vec(b) += sign_b * g;
        }
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& x, double c) {
  Tensor out(x.shape());
  vec(out) = vec(x) * c;
  if (tape.tracks({&x})) {
    tape.record("scale", {x}, out, [x, out, c]() mutable { grad_vec(x) += out_grad_vec(out) * c; });
  }
  return out;
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " . " + shape_str(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(a.rows());
  const auto k = static_cast<Eigen::Index>(a.cols());
  const auto n = static_cast<Eigen::Index>(b.cols());
  Tensor out(Shape{a.rows(), b.cols()});
  mat(out, m, n).noalias() = mat(a, m, k) * mat(b, k, n);
  if (tape.tracks({&a, &b})) {
    tape.record("matmul", {a, b}, out, [a, b, out, m, k, n]() mutable {
      auto g = out_grad_mat(out, m, n);
      if (a.requires_grad()) grad_mat(a, m, k).noalias() += g * mat(std::as_const(b), k, n).transpose();
      if (b.requires_grad()) grad_mat(b, k, n).noalias() += mat(std::as_const(a), m, k).transpose() * g;
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& x) {
  require_matrix(x, "transpose");
  const auto m = static_cast<Eigen::Index>(x.rows());
  const auto n = static_cast<Eigen::Index>(x.cols());
  Tensor out(Shape{x.cols(), x.rows()});
  mat(out, n, m) = mat(x, m, n).transpose();
  if (tape.tracks({&x})) {
    tape.record("transpose", {x}, out, [x, out, m, n]() mutable {
      grad_mat(x, m, n) += out_grad_mat(out, n, m).transpose();
    });
  }
  return out;
}

Tensor add_rowwise(Tape& tape, const Tensor& x, const Tensor& bias) {
  require_matrix(x, "add_rowwise");
  if (bias.rank() != 1 || bias.dim(0) != x.cols()) {
    throw DimensionError("add_rowwise: bias " + shape_str(bias.shape()) + " does not match " + shape_str(x.shape()));
  }
  const auto m = static_cast<Eigen::Index>(x.rows());
  const auto n = static_cast<Eigen::Index>(x.cols());
  Tensor out(x.shape());
  Eigen::Map<const Eigen::RowVectorXd> bv(bias.values().data(), n);
  mat(out, m, n) = mat(x, m, n).rowwise() + bv;
  if (tape.tracks({&x, &bias})) {
    tape.record("add_rowwise", {x, bias}, out, [x, bias, out, m, n]() mutable {
      auto g = out_grad_mat(out, m, n);
      if (x.requires_grad()) grad_mat(x, m, n) += g;
      if (bias.requires_grad()) {
        Eigen::Map<Eigen::RowVectorXd>(bias.grad_buffer().data(), n) += g.colwise().sum();
      }
    });
  }
  return out;
}

Tensor reduce_sum(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::scalar(vec(x).sum());
  if (tape.tracks({&x})) {
    tape.record("reduce_sum", {x}, out, [x, out]() mutable { grad_vec(x) += out.grad()[0]; });
  }
  return out;
}

Tensor reduce_mean(Tape& tape, const Tensor& x) {
  if (!x.defined() || x.size() == 0) throw ParameterError("reduce_mean: empty tensor");
  const double inv_n = 1.0 / static_cast<double>(x.size());
  Tensor out = Tensor::scalar(vec(x).sum() * inv_n);
  if (tape.tracks({&x})) {
    tape.record("reduce_mean", {x}, out, [x, out, inv_n]() mutable { grad_vec(x) += out.grad()[0] * inv_n; });
  }
  return out;
}

Tensor slice_cols(Tape& tape, const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_cols");
  if (begin >= end || end > x.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) + ") invalid for " +
                         shape_str(x.shape()));
  }
  const auto m = static_cast<Eigen::Index>(x.rows());
  const auto n = static_cast<Eigen::Index>(x.cols());
  const auto b = static_cast<Eigen::Index>(begin);
  const auto w = static_cast<Eigen::Index>(end - begin);
  Tensor out(Shape{x.rows(), end - begin});
  mat(out, m, w) = mat(x, m, n).middleCols(b, w);
  if (tape.tracks({&x})) {
    tape.record("slice_cols", {x}, out, [x, out, m, n, b, w]() mutable {
      grad_mat(x, m, n).middleCols(b, w) += out_grad_mat(out, m, w);
    });
  }
  return out;
}

Tensor slice_rows(Tape& tape, const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_rows");
  if (begin >= end || end > x.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) + ") invalid for " +
                         shape_str(x.shape()));
  }
  const std::size_t n = x.cols();
  Tensor out(Shape{end - begin, n});
  auto src = x.values().subspan(begin * n, (end - begin) * n);
  std::copy(src.begin(), src.end(), out.values().begin());
  if (tape.tracks({&x})) {
    tape.record("slice_rows", {x}, out, [x, out, begin, n]() mutable {
      auto g = out.grad();
      auto gx = x.grad_buffer().subspan(begin * n, g.size());
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ParameterError("concat_cols: no inputs");
  const std::size_t m = parts.front().rows();
  std::size_t total = 0;
  bool track = false;
  for (const auto& p : parts) {
    if (p.rows() != m) throw DimensionError("concat_cols: row counts differ");
    total += p.cols();
    track = track || tape.tracks({&p});
  }
  Tensor out(Shape{m, total});
  const auto em = static_cast<Eigen::Index>(m);
  const auto et = static_cast<Eigen::Index>(total);
  auto om = mat(out, em, et);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    const auto c = static_cast<Eigen::Index>(p.cols());
    om.middleCols(offset, c) = mat(p, em, c);
    offset += c;
  }
  if (track) {
    tape.record("concat_cols", parts, out, [parts, out, em, et]() mutable {
      auto g = out_grad_mat(out, em, et);
      Eigen::Index offset = 0;
      for (auto& p : parts) {
        const auto c = static_cast<Eigen::Index>(p.cols());
        if (p.requires_grad()) grad_mat(p, em, c) += g.middleCols(offset, c);
        offset += c;
      }
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape) + " changes element count");
  }
  Tensor out(std::move(shape));
  std::copy(x.values().begin(), x.values().end(), out.values().begin());
  if (tape.tracks({&x})) {
    tape.record("reshape", {x}, out, [x, out]() mutable { grad_vec(x) += out_grad_vec(out); });
  }
  return out;
}

}  // namespace dmltwin::ad
