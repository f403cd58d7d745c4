// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// FIR equalizer: stimulus, channels, delay scan, Adam training, cross-tests.

#include "dmltwin/equalizer/equalizer.hpp"

#include <cmath>

#include "dmltwin/autodiff/ops.hpp"
#include "dmltwin/errors.hpp"
#include "dmltwin/io/config.hpp"
#include "dmltwin/io/container.hpp"
#include "dmltwin/laser/normalize.hpp"
#include "dmltwin/rng.hpp"
#include "dmltwin/stimulus/filter.hpp"
#include "dmltwin/stimulus/pulses.hpp"
#include "dmltwin/training/train.hpp"

namespace dmltwin::eq {

namespace {

using Batch = std::vector<std::vector<double>>;

ad::Tensor stack(const Batch& xs) {
  const std::size_t T = xs.at(0).size();
  std::vector<double> flat;
  flat.reserve(xs.size() * T);
  for (const auto& x : xs) {
    if (x.size() != T) throw DimensionError("equalizer: sequences must share one length");
    flat.insert(flat.end(), x.begin(), x.end());
  }
  return ad::Tensor({xs.size(), T}, std::move(flat));
}

// Target delayed by d samples with a 0/1 mask excluding the first d samples of each sequence.
std::pair<ad::Tensor, ad::Tensor> delayed_target(const Batch& target, int delay) {
  const std::size_t T = target.at(0).size();
  const auto d = static_cast<std::size_t>(delay);
  std::vector<double> y(target.size() * T, 0.0), w(target.size() * T, 0.0);
  for (std::size_t b = 0; b < target.size(); ++b) {
    for (std::size_t t = d; t < T; ++t) {
      y[b * T + t] = target[b][t - d];
      w[b * T + t] = 1.0;
    }
  }
  const std::size_t n = y.size();
  return {ad::Tensor({n, 1}, std::move(y)), ad::Tensor({n, 1}, std::move(w))};
}

void check_pair(const Batch& received, const Batch& target) {
  if (received.empty() || received.size() != target.size()) {
    throw DimensionError("equalizer: " + std::to_string(received.size()) + " received vs " +
                         std::to_string(target.size()) + " target sequences");
  }
  for (std::size_t i = 0; i < received.size(); ++i) {
    if (received[i].size() != target[i].size()) throw DimensionError("equalizer: sequence length mismatch");
    if (received[i].size() <= static_cast<std::size_t>(kMaxDelay)) {
      throw DimensionError("equalizer: sequences must be longer than the delay range");
    }
  }
}

}  // namespace

FirEqualizer FirEqualizer::delta(std::size_t index) {
  if (index >= kTaps) throw ParameterError("equalizer: delta index out of range");
  FirEqualizer eq;
  eq.taps[index] = 1.0;
  return eq;
}

void FirEqualizer::validate() const {
  if (taps.size() != kTaps) throw ParameterError("equalizer: expected 31 taps, got " + std::to_string(taps.size()));
  if (delay < 0 || delay > kMaxDelay) throw ParameterError("equalizer: delay must lie in [0, 15]");
  for (double v : taps) {
    if (!std::isfinite(v)) throw ParameterError("equalizer: non-finite tap");
  }
}

std::vector<double> fir_apply(const FirEqualizer& eq, std::span<const double> x) {
  eq.validate();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const std::size_t kmax = std::min(kTaps - 1, t);
    double acc = 0.0;
    for (std::size_t k = 0; k <= kmax; ++k) acc += eq.taps[k] * x[t - k];
    y[t] = acc;
  }
  return y;
}

void EqRunConfig::validate() const {
  if (!(rate_fraction > 0.0 && rate_fraction <= 2.0)) throw ParameterError("equalizer: rate_fraction must lie in (0, 2]");
  if (n_symbols < 256) throw ParameterError("equalizer: n_symbols must be at least 256");
  if (sps <= 0 || seq_len <= 0 || seq_len % sps != 0) throw ParameterError("equalizer: seq_len must be a multiple of sps");
  if (n_symbols % static_cast<std::size_t>(seq_len / sps) != 0) {
    throw ParameterError("equalizer: n_symbols must be a multiple of the symbols per sequence");
  }
  if (!(learning_rate > 0.0)) throw ParameterError("equalizer: learning_rate must be positive");
  if (!(lpf_cutoff > 0.0 && lpf_cutoff < 0.5 * sps)) throw ParameterError("equalizer: lpf_cutoff out of range");
}

SquareStream gen_square_4pam(const EqRunConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  std::uniform_int_distribution<int> level(0, 3);
  const auto per_seq = static_cast<std::size_t>(cfg.seq_len / cfg.sps);
  SquareStream s;
  for (std::size_t q = 0; q < cfg.n_sequences(); ++q) {
    std::vector<int> sym(per_seq);
    std::vector<double> raw;
    raw.reserve(static_cast<std::size_t>(cfg.seq_len));
    for (auto& v : sym) {
      v = level(rng);
      raw.insert(raw.end(), static_cast<std::size_t>(cfg.sps), stim::kPamLevels[v]);
    }
    // Filter corners scale with R_s, so only the ratio to the sample rate matters.
    s.waveform.push_back(stim::lowpass_filter(raw, cfg.lpf_cutoff, static_cast<double>(cfg.sps)));
    s.raw.push_back(std::move(raw));
    s.symbols.push_back(std::move(sym));
  }
  return s;
}

SquareStream stream_for(const EqRunConfig& cfg, EvalStream which) {
  auto rng = keyed_engine(cfg.seed, which == EvalStream::training ? Stream::equalizer_symbols
                                                                  : Stream::equalizer_eval_symbols);
  return gen_square_4pam(cfg, rng);
}

Channel surrogate_channel(surrogate::SurrogateModel model) {
  auto id = surrogate::to_string(model.hyper.kind);
  return {id, [m = std::move(model)](const Batch& xs) { return surrogate::predict(m, xs); }};
}

Channel ode_channel(const stim::Dataset& ds) {
  return {"ode", [link = ds.link, fs = ds.sample_rate, rec = ds.target_record](const Batch& xs) {
            Batch out;
            out.reserve(xs.size());
            for (const auto& x : xs) {
              out.push_back(laser::normalize(
                  laser::simulate_power(x, fs, link.bias, link.laser, link.solver), rec));
            }
            return out;
          }};
}

Channel identity_channel() {
  return {"identity", [](const Batch& xs) { return xs; }};
}

Channel delay_channel(std::size_t samples) {
  return {"delay" + std::to_string(samples), [samples](const Batch& xs) {
            Batch out;
            for (const auto& x : xs) {
              std::vector<double> y(x.size(), 0.0);
              for (std::size_t t = samples; t < x.size(); ++t) y[t] = x[t - samples];
              out.push_back(std::move(y));
            }
            return out;
          }};
}

double eq_nrmse(const FirEqualizer& eq, const Batch& received, const Batch& target) {
  check_pair(received, target);
  const auto d = static_cast<std::size_t>(eq.delay);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < received.size(); ++b) {
    const auto z = fir_apply(eq, received[b]);
    for (std::size_t t = d; t < z.size(); ++t) {
      const double r = z[t] - target[b][t - d];
      acc += r * r;
    }
    n += z.size() - d;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

ad::Tensor eq_loss(ad::Tape& tape, const ad::Tensor& taps, const ad::Tensor& lagged, const ad::Tensor& target,
                   const ad::Tensor& weight) {
  double count = 0.0;
  for (double w : weight.values()) count += w;
  if (!(count > 0.0)) throw ContractError("eq_loss: empty mask");
  const auto r = ad::sub(tape, ad::matmul(tape, lagged, taps), target);
  const auto se = ad::reduce_sum(tape, ad::mul(tape, ad::square(tape, r), weight));
  return ad::sqrt(tape, ad::scale(tape, se, 1.0 / count));
}

EqTrainResult train_equalizer_on(const Batch& received, const SquareStream& stream, const EqRunConfig& cfg,
                                 const std::string& channel_id) {
  cfg.validate();
  const auto& target = stream.waveform;
  check_pair(received, target);
  EqTrainResult res;
  FirEqualizer eq = FirEqualizer::delta();
  eq.channel = channel_id;
  for (int d = 0; d <= kMaxDelay; ++d) {
    eq.delay = d;
    res.delay_scan.push_back(eq_nrmse(eq, received, target));
  }
  eq.delay = static_cast<int>(std::min_element(res.delay_scan.begin(), res.delay_scan.end()) - res.delay_scan.begin());
  res.baseline_nrmse = res.delay_scan[static_cast<std::size_t>(eq.delay)];

  auto no_grad = ad::Tape::no_grad();
  const auto lagged = ad::lag_matrix(no_grad, stack(received), kTaps);
  const auto [y, w] = delayed_target(target, eq.delay);
  ad::Tensor taps({kTaps, 1}, eq.taps, true);
  std::vector<ad::NamedTensor> params{{"taps", taps}};
  auto state = train::AdamState::zeros(params);
  const train::AdamConfig adam{cfg.learning_rate, 0.9, 0.999, 1e-8};

  std::vector<double> best_taps = eq.taps;
  double best = res.baseline_nrmse;
  const double initial = res.baseline_nrmse;
  std::size_t above = 0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    ad::Tape tape;
    auto loss = eq_loss(tape, taps, lagged, y, w);
    const double value = loss.item();
    res.history.push_back(value);
    if (!std::isfinite(value)) {
      res.aborted = true;
      res.abort_reason = "non-finite loss at iteration " + std::to_string(it);
      break;
    }
    if (value < best) {
      best = value;
      best_taps.assign(taps.values().begin(), taps.values().end());
    }
    if (value == 0.0) break;  // exact fit; the gradient of the root is undefined here
    above = value > 10.0 * initial ? above + 1 : 0;
    if (above >= 50) {
      res.aborted = true;
      res.abort_reason = "loss above 10x its initial value for 50 iterations (iteration " + std::to_string(it) + ")";
      break;
    }
    taps.zero_grad();
    ad::backward(loss, tape);
    try {
      train::adam_step(params, state, adam);
    } catch (const NumericalError& e) {
      res.aborted = true;
      res.abort_reason = e.what();
      break;
    }
  }
  if (!res.aborted) {
    FirEqualizer last = eq;
    last.taps.assign(taps.values().begin(), taps.values().end());
    if (eq_nrmse(last, received, target) < best) best_taps = last.taps;
  }
  eq.taps = best_taps;
  res.eq = eq;
  res.final_nrmse = eq_nrmse(eq, received, target);
  return res;
}

EqTrainResult train_equalizer(const Channel& channel, const EqRunConfig& cfg) {
  const auto stream = stream_for(cfg, EvalStream::training);
  return train_equalizer_on(channel.apply(stream.waveform), stream, cfg, channel.id);
}

double cross_evaluate(const FirEqualizer& eq, const Channel& b, const EqRunConfig& cfg, EvalStream which) {
  const auto stream = stream_for(cfg, which);
  return eq_nrmse(eq, b.apply(stream.waveform), stream.waveform);
}

nlohmann::json to_json(const FirEqualizer& eq) {
  return {{"taps", eq.taps}, {"delay", eq.delay}, {"channel", eq.channel}};
}

FirEqualizer equalizer_from_json(const nlohmann::json& j) {
  FirEqualizer eq;
  eq.taps = io::field<std::vector<double>>(j, "taps", "equalizer");
  eq.delay = io::field<int>(j, "delay", "equalizer");
  eq.channel = io::field<std::string>(j, "channel", "equalizer");
  try {
    eq.validate();
  } catch (const ParameterError& e) {
    throw FileError(std::string("equalizer file: ") + e.what());
  }
  return eq;
}

void save_equalizer(const std::filesystem::path& path, const FirEqualizer& eq, const nlohmann::json& extra) {
  auto j = extra.is_object() ? extra : nlohmann::json::object();
  j["equalizer"] = to_json(eq);
  io::write_text(path, j.dump(2) + "\n");
}

FirEqualizer load_equalizer(const std::filesystem::path& path) {
  const auto j = io::read_json(path);
  return equalizer_from_json(j.contains("equalizer") ? j["equalizer"] : j);
}

nlohmann::json to_json(const EqRunConfig& c) {
  return {{"rate_fraction", c.rate_fraction}, {"n_symbols", c.n_symbols},  {"seed", c.seed},
          {"learning_rate", c.learning_rate}, {"iterations", c.iterations}, {"sps", c.sps},
          {"seq_len", c.seq_len},             {"lpf_cutoff", c.lpf_cutoff}};
}

EqRunConfig eq_config_from_json(const nlohmann::json& j, EqRunConfig base) {
  auto opt = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = io::field<std::decay_t<decltype(dst)>>(j, key, "equalizer");
  };
  opt("rate_fraction", base.rate_fraction);
  opt("n_symbols", base.n_symbols);
  opt("seed", base.seed);
  opt("learning_rate", base.learning_rate);
  opt("iterations", base.iterations);
  opt("sps", base.sps);
  opt("seq_len", base.seq_len);
  opt("lpf_cutoff", base.lpf_cutoff);
  base.validate();
  return base;
}

}  // namespace dmltwin::eq
