// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// FIR equalizer: filtering, stimulus, training on known channels, cross-tests.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "dmltwin/autodiff/gradcheck.hpp"
#include "dmltwin/autodiff/ops.hpp"
#include "dmltwin/equalizer/equalizer.hpp"
#include "dmltwin/errors.hpp"
#include "dmltwin/io/container.hpp"

using namespace dmltwin;
using namespace dmltwin::eq;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

EqRunConfig small_cfg() {
  EqRunConfig c;
  c.n_symbols = 256;
  c.iterations = 300;
  return c;
}

}  // namespace

TEST_CASE("FIR filtering", "[equalizer][fir]") {
  const auto x = random_signal(200, 1);
  CHECK(fir_apply(FirEqualizer::delta(0), x) == x);
  const auto d5 = fir_apply(FirEqualizer::delta(5), x);
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(d5[t] == (t >= 5 ? x[t - 5] : 0.0));

  FirEqualizer eq;
  eq.taps = random_signal(kTaps, 2);
  const auto y = fir_apply(eq, x);
  // Full linear convolution, truncated to the input length.
  std::vector<double> full(x.size() + kTaps - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = 0; k < kTaps; ++k) full[i + k] += x[i] * eq.taps[k];
  }
  for (std::size_t t = 0; t < x.size(); ++t) CHECK_THAT(y[t], WithinAbs(full[t], 1e-13));

  eq.taps.resize(30);
  CHECK_THROWS_AS(fir_apply(eq, x), ParameterError);
}

TEST_CASE("FIR output never depends on future input", "[equalizer][causality]") {
  FirEqualizer eq;
  eq.taps = random_signal(kTaps, 3);
  std::mt19937_64 rng(9);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto x = random_signal(256, 50 + trial);
    const auto base = fir_apply(eq, x);
    const auto t0 = std::uniform_int_distribution<std::size_t>(0, 255)(rng);
    x[t0] += 1.0;
    const auto moved = fir_apply(eq, x);
    for (std::size_t t = 0; t < t0; ++t) violations += moved[t] != base[t];
  }
  CHECK(violations == 0);
}

TEST_CASE("equalizer loss gradient", "[equalizer][gradcheck]") {
  const std::size_t B = 2, T = 64;
  auto no_grad = ad::Tape::no_grad();
  const auto lagged = ad::lag_matrix(no_grad, ad::Tensor({B, T}, random_signal(B * T, 4)), kTaps);
  const ad::Tensor target({B * T, 1}, random_signal(B * T, 5));
  std::vector<double> w(B * T, 1.0);
  for (std::size_t i = 0; i < 3; ++i) w[i] = w[T + i] = 0.0;
  const ad::Tensor weight({B * T, 1}, w);
  ad::Tensor taps({kTaps, 1}, random_signal(kTaps, 6), true);
  auto f = [&](ad::Tape& tape) { return eq_loss(tape, taps, lagged, target, weight); };
  const auto report = ad::gradcheck(f, taps);
  CHECK(report.entries.size() == kTaps);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("square 4PAM stimulus", "[equalizer][stimulus]") {
  auto cfg = small_cfg();
  const auto a = stream_for(cfg, EvalStream::training);
  const auto b = stream_for(cfg, EvalStream::training);
  const auto c = stream_for(cfg, EvalStream::held_out);
  CHECK(a.symbols == b.symbols);
  CHECK(a.waveform == b.waveform);
  CHECK(a.symbols != c.symbols);
  REQUIRE(a.raw.size() == cfg.n_sequences());
  for (std::size_t q = 0; q < a.raw.size(); ++q) {
    for (std::size_t t = 0; t < a.raw[q].size(); ++t) {
      CHECK(a.raw[q][t] == a.raw[q][t - t % cfg.sps]);
      CHECK(a.raw[q][t] == stim::kPamLevels[a.symbols[q][t / cfg.sps]]);
    }
    for (double v : a.waveform[q]) {
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }

  cfg.n_symbols = 4096;
  const auto big = stream_for(cfg, EvalStream::training);
  std::array<int, 4> hist{};
  for (const auto& s : big.symbols) {
    for (int v : s) ++hist[static_cast<std::size_t>(v)];
  }
  for (int h : hist) CHECK(std::abs(h / 4096.0 - 0.25) < 0.02);

  cfg.n_symbols = 100;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("identity and delay channels are inverted", "[equalizer][train]") {
  const auto cfg = small_cfg();
  const auto id = train_equalizer(identity_channel(), cfg);
  CHECK(id.eq.delay == 0);
  CHECK(id.final_nrmse < 1e-3);
  CHECK_THAT(id.eq.taps[0], WithinAbs(1.0, 1e-3));

  const auto d3 = train_equalizer(delay_channel(3), cfg);
  CHECK(d3.eq.delay == 3);
  CHECK(d3.final_nrmse < 1e-3);
  CHECK(d3.final_nrmse <= d3.baseline_nrmse);
  CHECK(cross_evaluate(id.eq, identity_channel(), cfg) < 1e-3);
}

TEST_CASE("equalizer improves a dispersive linear channel", "[equalizer][train]") {
  // A two-tap echo: the delta start is poor, and the optimum is reachable.
  const Channel echo{"echo", [](const std::vector<std::vector<double>>& xs) {
                       std::vector<std::vector<double>> out;
                       for (const auto& x : xs) {
                         std::vector<double> y(x.size());
                         for (std::size_t t = 0; t < x.size(); ++t) y[t] = x[t] + (t >= 4 ? 0.5 * x[t - 4] : 0.0);
                         out.push_back(std::move(y));
                       }
                       return out;
                     }};
  auto cfg = small_cfg();
  cfg.iterations = 1500;
  cfg.learning_rate = 3e-3;
  const auto r = train_equalizer(echo, cfg);
  CHECK(!r.aborted);
  CHECK(r.final_nrmse < 0.5 * r.baseline_nrmse);
  CHECK(r.history.size() == cfg.iterations);
  CHECK_THAT(cross_evaluate(r.eq, echo, cfg, EvalStream::training), WithinAbs(r.final_nrmse, 1e-9));
  CHECK(cross_evaluate(r.eq, echo, cfg) < r.baseline_nrmse);
}

TEST_CASE("ODE channel at a low rate is improved by equalization", "[equalizer][ode]") {
  auto spec = stim::StimulusSpec::desk(0.1, 4);
  spec.n_train_seq = 8;
  spec.n_val_samples = 2 * 1024;
  const auto ds = stim::generate_dataset(spec, stim::LinkConfig::defaults());
  auto cfg = small_cfg();
  cfg.rate_fraction = 0.1;
  cfg.iterations = 500;
  const auto r = train_equalizer(ode_channel(ds), cfg);
  CHECK(r.final_nrmse < r.baseline_nrmse);
  CHECK_THAT(cross_evaluate(r.eq, ode_channel(ds), cfg, EvalStream::training), WithinAbs(r.final_nrmse, 1e-9));
}

TEST_CASE("divergence aborts and keeps the best taps", "[equalizer][train]") {
  auto cfg = small_cfg();
  cfg.learning_rate = 50.0;
  cfg.iterations = 400;
  const Channel scaled{"scaled", [](const std::vector<std::vector<double>>& xs) {
                         auto out = xs;
                         for (auto& x : out) {
                           for (auto& v : x) v = 0.8 * v + 0.05;
                         }
                         return out;
                       }};
  const auto r = train_equalizer(scaled, cfg);
  CHECK(r.aborted);
  CHECK(r.abort_reason.find("10x") != std::string::npos);
  CHECK(r.final_nrmse <= r.baseline_nrmse);
}

TEST_CASE("equalizer files round-trip", "[equalizer][io]") {
  FirEqualizer eq;
  eq.taps = random_signal(kTaps, 8);
  eq.delay = 7;
  eq.channel = "cat";
  const auto path = std::filesystem::temp_directory_path() / "dmltwin_eq.json";
  save_equalizer(path, eq, {{"rate_fraction", 0.54}});
  const auto back = load_equalizer(path);
  CHECK(back.taps == eq.taps);
  CHECK(back.delay == 7);
  CHECK(back.channel == "cat");
  io::write_text(path, R"({"equalizer": {"taps": [1, 2], "delay": 0, "channel": "x"}})");
  CHECK_THROWS_AS(load_equalizer(path), FileError);
  std::filesystem::remove(path);

  const auto cfg = eq_config_from_json({{"iterations", 12}, {"rate_fraction", 0.76}}, EqRunConfig{});
  CHECK(cfg.iterations == 12);
  CHECK(cfg.rate_fraction == 0.76);
}
