// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/io/config.hpp"

#include "dmltwin/io/container.hpp"

namespace dmltwin::io {

json to_json(const laser::LaserParams& p) {
  return {{"g0", p.g0},         {"N0", p.n0},           {"eps", p.eps},
          {"tau_n", p.tau_n},   {"tau_p", p.tau_p},     {"gamma_c", p.gamma_c},
          {"beta_sp", p.beta_sp}, {"V_act", p.v_act},   {"q_e", p.q_e}};
}

json to_json(const laser::BiasMap& b) { return {{"I_bias", b.i_bias}, {"I_pp", b.i_pp}}; }

json to_json(const laser::SolverConfig& s) {
  return {{"rel_tol", s.rel_tol}, {"abs_tol", s.abs_tol}, {"max_step", s.max_step}, {"dense_output", s.dense_output}};
}

json to_json(const laser::MinMaxRecord& r) { return {{"min", r.min}, {"max", r.max}}; }

json to_json(const stim::StimulusSpec& s) {
  return {{"rate_fraction", s.rate_fraction}, {"sps", s.sps},
          {"seq_len", s.seq_len},             {"block_len", s.block_len},
          {"n_train_seq", s.n_train_seq},     {"n_val_samples", s.n_val_samples},
          {"seed", s.seed},                   {"lpf_cutoff", s.lpf_cutoff}};
}

json to_json(const stim::LinkConfig& l) {
  return {{"laser", to_json(l.laser)}, {"bias", to_json(l.bias)}, {"solver", to_json(l.solver)}};
}

laser::LaserParams laser_from_json(const json& j, const std::string& w) {
  laser::LaserParams p;
  p.g0 = field<double>(j, "g0", w);
  p.n0 = field<double>(j, "N0", w);
  p.eps = field<double>(j, "eps", w);
  p.tau_n = field<double>(j, "tau_n", w);
  p.tau_p = field<double>(j, "tau_p", w);
  p.gamma_c = field<double>(j, "gamma_c", w);
  p.beta_sp = field<double>(j, "beta_sp", w);
  p.v_act = field<double>(j, "V_act", w);
  p.q_e = field<double>(j, "q_e", w);
  p.validate();
  return p;
}

laser::BiasMap bias_from_json(const json& j, const std::string& w) {
  laser::BiasMap b{field<double>(j, "I_bias", w), field<double>(j, "I_pp", w)};
  b.validate();
  return b;
}

laser::SolverConfig solver_from_json(const json& j, const std::string& w) {
  laser::SolverConfig s;
  s.rel_tol = field<double>(j, "rel_tol", w);
  s.abs_tol = field<double>(j, "abs_tol", w);
  s.max_step = field<double>(j, "max_step", w);
  s.dense_output = field<bool>(j, "dense_output", w);
  s.validate();
  return s;
}

laser::MinMaxRecord record_from_json(const json& j, const std::string& w) {
  laser::MinMaxRecord r{field<double>(j, "min", w), field<double>(j, "max", w)};
  r.validate();
  return r;
}

stim::StimulusSpec stimulus_from_json(const json& j, const std::string& w) {
  stim::StimulusSpec s;
  s.rate_fraction = field<double>(j, "rate_fraction", w);
  s.sps = field<int>(j, "sps", w);
  s.seq_len = field<int>(j, "seq_len", w);
  s.block_len = field<int>(j, "block_len", w);
  s.n_train_seq = field<std::size_t>(j, "n_train_seq", w);
  s.n_val_samples = field<std::size_t>(j, "n_val_samples", w);
  s.seed = field<std::uint64_t>(j, "seed", w);
  s.lpf_cutoff = field<double>(j, "lpf_cutoff", w);
  s.validate();
  return s;
}

stim::LinkConfig link_from_json(const json& j, const std::string& w) {
  return {laser_from_json(field<json>(j, "laser", w), w + ".laser"), bias_from_json(field<json>(j, "bias", w), w + ".bias"),
          solver_from_json(field<json>(j, "solver", w), w + ".solver")};
}

std::string config_hash(const json& j) { return sha256_hex(j.dump()); }

}  // namespace dmltwin::io
