// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pulse shapes, shape draws, drive assembly, LPF and dataset generation.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "dmltwin/errors.hpp"
#include "dmltwin/rng.hpp"
#include "dmltwin/stimulus/dataset.hpp"
#include "dmltwin/stimulus/filter.hpp"
#include "dmltwin/stimulus/pulses.hpp"
#include "oracles.hpp"

using namespace dmltwin;
using namespace dmltwin::stim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("super-Gaussian full width at exp(-1/2) equals T0", "[stimulus][pulse]") {
  for (double n : {1.0, 2.5, 6.0}) {
    const auto p = supergaussian_pulse(0.5, n, 1.0, 32);  // T0/2 = 0.25 lands on samples 8 and 24
    CHECK_THAT(p[8], WithinRel(std::exp(-0.5), 1e-12));
    CHECK_THAT(p[24], WithinRel(std::exp(-0.5), 1e-12));
    CHECK(p[16] == 1.0);
  }
}

TEST_CASE("order one is a Gaussian with standard deviation T0/2", "[stimulus][pulse]") {
  const double t0 = 0.37, sd = t0 / 2;
  const auto p = supergaussian_pulse(t0, 1.0, 1.0, 32);
  for (int j = 0; j < 32; ++j) {
    const double t = j / 32.0 - 0.5;
    CHECK_THAT(p[j], WithinAbs(std::exp(-t * t / (2 * sd * sd)), 1e-14));
  }
}

TEST_CASE("high-order pulse is flat over the central 40%", "[stimulus][pulse]") {
  const auto p = supergaussian_pulse(0.8, 6.0, 1.0, 320);
  for (int j = 0; j < 320; ++j) {
    const double t = j / 320.0;
    if (t >= 0.3 && t <= 0.7) CHECK(p[j] > 0.99);
  }
}

TEST_CASE("random pulses follow the folded N(0.5, 1)", "[stimulus][pulse]") {
  auto rng = keyed_engine(42, Stream::test_draws);
  const auto x = random_pulse(1000000, rng);
  double mean = 0.0;
  for (double v : x) {
    REQUIRE(v >= 0.0);
    mean += v;
  }
  mean /= static_cast<double>(x.size());
  CHECK_THAT(mean, WithinRel(oracle::folded_normal_mean(0.5, 1.0), 0.01));

  std::vector<double> sub(x.begin(), x.begin() + 100000);
  const double d = oracle::ks_statistic(sub, [](double v) { return oracle::folded_normal_cdf(v, 0.5, 1.0); });
  CHECK(d < oracle::ks_critical_1pct(sub.size()));

  auto a = keyed_engine(7, Stream::test_draws), b = keyed_engine(7, Stream::test_draws);
  CHECK(random_pulse(32, a) == random_pulse(32, b));
}

TEST_CASE("shape draws alternate and follow their distributions", "[stimulus][shape]") {
  auto rng = keyed_engine(3, Stream::test_draws);
  const double t_sym = 1.0;
  std::vector<double> t0s, orders;
  for (int i = 0; i < 200000; ++i) {
    const auto s = draw_shape_params(i, t_sym, 32, rng);
    REQUIRE(s.super_gaussian == (i % 2 == 0));
    if (!s.super_gaussian) continue;
    REQUIRE(s.order >= 1.0);
    REQUIRE(s.order <= 6.0);
    REQUIRE(s.t0 >= t_sym / 32);
    t0s.push_back(s.t0);
    orders.push_back(s.order);
  }
  REQUIRE(t0s.size() == 100000);
  const double d_t0 = oracle::ks_statistic(
      t0s, [&](double v) { return oracle::truncated_folded_normal_cdf(v, 0.25 * t_sym, t_sym, t_sym / 32); });
  CHECK(d_t0 < 0.01);
  CHECK(d_t0 < oracle::ks_critical_1pct(t0s.size()));
  const double d_n = oracle::ks_statistic(orders, [](double v) { return std::clamp((v - 1.0) / 5.0, 0.0, 1.0); });
  CHECK(d_n < oracle::ks_critical_1pct(orders.size()));
}

TEST_CASE("drive sequences have the declared structure", "[stimulus][drive]") {
  const auto spec = StimulusSpec::desk(0.5, 9);
  const double rs = 2.5e9;
  std::vector<std::size_t> counts(4, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < 3200; ++i) {
    auto rng = keyed_engine(9, Stream::test_draws, i);
    const auto d = build_drive_sequence(spec, rs, rng);
    REQUIRE(d.waveform.size() == 1024);
    REQUIRE(d.symbols.size() == 32);
    REQUIRE(d.shapes.size() == 4);
    for (std::size_t b = 0; b < 4; ++b) REQUIRE(d.shapes[b].super_gaussian == (b % 2 == 0));
    for (double v : d.waveform) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
    for (int s : d.symbols) ++counts[static_cast<std::size_t>(s)], ++total;
  }
  for (auto c : counts) CHECK(std::abs(static_cast<double>(c) / total - 0.25) < 0.01);
  CHECK(oracle::chi_square_uniform(counts) < oracle::kChiSquare3dof1pct);

  auto a = keyed_engine(1, Stream::train_sequence, 5), b = keyed_engine(1, Stream::train_sequence, 5);
  CHECK(build_drive_sequence(spec, rs, a).waveform == build_drive_sequence(spec, rs, b).waveform);
}

TEST_CASE("Gaussian low-pass filter", "[stimulus][lpf]") {
  const double rs = 1e9, fs = 32 * rs;
  const std::vector<double> flat(300, 0.42);
  for (double v : lowpass_filter(flat, rs, fs)) CHECK_THAT(v, WithinAbs(0.42, 1e-9));

  const auto taps = gaussian_taps(rs, fs);
  REQUIRE(taps.size() % 2 == 1);
  for (std::size_t k = 0; k < taps.size(); ++k) CHECK(taps[k] == taps[taps.size() - 1 - k]);

  auto gain_at = [&](double f) {
    std::complex<double> h = 0.0;
    const int half = static_cast<int>(taps.size() / 2);
    for (int k = -half; k <= half; ++k) h += taps[k + half] * std::exp(std::complex<double>(0, -2 * std::numbers::pi * f * k / fs));
    return h;
  };
  CHECK_THAT(std::abs(gain_at(rs)), WithinAbs(1.0 / std::sqrt(2.0), 1e-3));
  CHECK(std::abs(gain_at(rs).imag()) < 1e-12);

  // Measured attenuation of a 3 R_s tone away from the edges.
  std::vector<double> tone(4096);
  for (std::size_t j = 0; j < tone.size(); ++j) tone[j] = std::sin(2 * std::numbers::pi * 3 * rs * j / fs);
  const auto y = lowpass_filter(tone, rs, fs);
  double in = 0.0, out = 0.0;
  for (std::size_t j = 512; j < 3584; ++j) in += tone[j] * tone[j], out += y[j] * y[j];
  CHECK(10 * std::log10(out / in) < -10.0);

  CHECK_THROWS_AS(lowpass_filter(flat, 0.0, fs), ParameterError);
  CHECK_THROWS_AS(lowpass_filter(flat, fs / 2, fs), ParameterError);
}

TEST_CASE("stimulus spec validation", "[stimulus]") {
  auto s = StimulusSpec::paper(0.5, 1);
  CHECK(s.n_train_seq == 8192);
  CHECK(s.n_val_seq() == 128);
  s.block_len = 5;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = StimulusSpec::desk(0.5, 1);
  s.seq_len = 1000;
  CHECK_THROWS_AS(s.validate(), ParameterError);
}

TEST_CASE("dataset generation is reproducible and round-trips", "[stimulus][dataset]") {
  auto spec = StimulusSpec::desk(0.54, 17);
  spec.n_train_seq = 6;
  spec.n_val_samples = 2 * 1024;
  const auto link = LinkConfig::defaults();
  const auto a = generate_dataset(spec, link);
  const auto b = generate_dataset(spec, link);
  CHECK(dataset_hash(a) == dataset_hash(b));
  REQUIRE(a.train.size() == 6);
  REQUIRE(a.validation.size() == 2);
  double lo = 1.0, hi = 0.0;
  for (const auto& p : a.train) {
    for (double v : p.target) lo = std::min(lo, v), hi = std::max(hi, v);
    for (double v : p.drive) REQUIRE((v >= 0.0 && v <= 1.0));
  }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
  CHECK_THAT(a.symbol_rate, WithinRel(0.54 * a.f_r, 1e-15));

  const auto path = std::filesystem::temp_directory_path() / "dmltwin_test_dataset.bin";
  save_dataset(path, a);
  const auto c = load_dataset(path);
  CHECK(dataset_hash(c) == dataset_hash(a));
  CHECK(c.train[3].target == a.train[3].target);
  CHECK(c.validation[1].shapes[2].t0 == a.validation[1].shapes[2].t0);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-8, std::ios::end);
    const double junk = 123.0;
    f.write(reinterpret_cast<const char*>(&junk), sizeof junk);
  }
  CHECK_THROWS_AS(load_dataset(path), FileError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_dataset(path), FileError);

  auto other = spec;
  other.seed = 18;
  CHECK(dataset_hash(generate_dataset(other, link)) != dataset_hash(a));
}
