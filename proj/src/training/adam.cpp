// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Losses and the Adam update.

#include <cmath>

#include "dmltwin/errors.hpp"
#include "dmltwin/training/train.hpp"

namespace dmltwin::train {

double nmse(std::span<const double> pred, std::span<const double> target, double range) {
  if (pred.size() != target.size()) {
    throw DimensionError("nmse: " + std::to_string(pred.size()) + " predictions vs " + std::to_string(target.size()) +
                         " targets");
  }
  if (!(range > 0.0)) throw ParameterError("nmse: range must be positive");
  if (pred.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size()) / (range * range);
}

double nrmse(std::span<const double> pred, std::span<const double> target, double range) {
  return std::sqrt(nmse(pred, target, range));
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ParameterError("adam: learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ParameterError("adam: beta1 must lie in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ParameterError("adam: beta2 must lie in (0,1)");
  if (!(eps > 0.0)) throw ParameterError("adam: eps must be positive");
}

AdamState AdamState::zeros(const std::vector<ad::NamedTensor>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.tensor.size(), 0.0);
    s.v.emplace_back(p.tensor.size(), 0.0);
  }
  return s;
}

void adam_step(std::vector<ad::NamedTensor>& params, AdamState& state, const AdamConfig& cfg) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ContractError("adam_step: state does not match the parameter list");
  }
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    const auto g = p.tensor.grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericalError("adam_step: non-finite gradient in '" + p.name + "' at index " + std::to_string(i));
      }
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].tensor;
    if (!p.has_grad()) continue;
    const auto g = p.grad();
    auto theta = p.values();
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != theta.size()) throw ContractError("adam_step: state size mismatch for '" + params[k].name + "'");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      theta[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
  }
}

}  // namespace dmltwin::train
