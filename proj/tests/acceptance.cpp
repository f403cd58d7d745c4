// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance criteria 1-11. Usage: dmltwin_acceptance <n>|all
// Prints one PASS/FAIL line per criterion; exit status is non-zero on any FAIL.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "dmltwin/autodiff/gradcheck.hpp"
#include "dmltwin/autodiff/ops.hpp"
#include "dmltwin/equalizer/equalizer.hpp"
#include "dmltwin/eval/eval.hpp"
#include "dmltwin/laser/normalize.hpp"
#include "dmltwin/laser/rate_equations.hpp"
#include "dmltwin/laser/simulate.hpp"
#include "dmltwin/rng.hpp"
#include "dmltwin/stimulus/dataset.hpp"
#include "dmltwin/stimulus/pulses.hpp"
#include "dmltwin/surrogates/model.hpp"
#include "dmltwin/training/train.hpp"
#include "oracles.hpp"

using namespace dmltwin;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr surrogate::ModelKind kAllKinds[] = {surrogate::ModelKind::volterra, surrogate::ModelKind::tdnn,
                                              surrogate::ModelKind::lstm, surrogate::ModelKind::cat};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(const std::string& s) {
  std::printf("  %s\n", s.c_str());
  std::fflush(stdout);
}

std::vector<double> uniform_signal(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

// ---- 1. small-signal fidelity

// Linearised response dS/dI at angular frequency w, from a finite-difference Jacobian
// of an independent transcription of the rate equations.
std::complex<double> linear_response(const laser::LaserParams& p, double I, laser::RateState ss, double f) {
  auto rhs = [&](double N, double S) {
    const double stim = p.g0 * (N - p.n0) * S / (1.0 + p.eps * S);
    return Eigen::Vector2d(I / (p.q_e * p.v_act) - N / p.tau_n - stim,
                           p.gamma_c * stim - S / p.tau_p + p.gamma_c * p.beta_sp * N / p.tau_n);
  };
  const double hn = 1e-6 * ss.carriers, hs = 1e-6 * ss.photons;
  Eigen::Matrix2cd A;
  const Eigen::Vector2d dn = (rhs(ss.carriers + hn, ss.photons) - rhs(ss.carriers - hn, ss.photons)) / (2 * hn);
  const Eigen::Vector2d ds = (rhs(ss.carriers, ss.photons + hs) - rhs(ss.carriers, ss.photons - hs)) / (2 * hs);
  const std::complex<double> jw(0.0, 2.0 * kPi * f);
  A << jw - dn[0], -ds[0], -dn[1], jw - ds[1];
  const Eigen::Vector2cd b(1.0 / (p.q_e * p.v_act), 0.0);
  return A.partialPivLu().solve(b)[1];
}

std::complex<double> tone(const std::vector<double>& x, std::size_t from, double fs, double f) {
  double mean = 0.0;
  for (std::size_t j = from; j < x.size(); ++j) mean += x[j];
  mean /= static_cast<double>(x.size() - from);
  std::complex<double> acc = 0.0;
  for (std::size_t j = from; j < x.size(); ++j) {
    acc += (x[j] - mean) * std::exp(std::complex<double>(0.0, -2.0 * kPi * f * static_cast<double>(j) / fs));
  }
  return 2.0 * acc / static_cast<double>(x.size() - from);
}

Outcome c1_ode_fidelity() {
  const laser::LaserParams p;
  const auto bias = laser::BiasMap::defaults_for(p);
  const auto ss = laser::steady_state(bias.i_bias, p);
  const double fr = laser::relaxation_frequency(p, bias.i_bias);
  const double amp = 0.01 * bias.i_bias / bias.i_pp;
  double worst_mag = 0.0, worst_phase = 0.0;
  for (double ratio : {0.10, 0.25, 0.40, 0.55, 0.70, 0.85, 1.00, 1.20}) {
    const double f = ratio * fr, fs = 128.0 * f;
    const std::size_t settle = static_cast<std::size_t>(std::ceil(3e-9 * f)) * 128;
    const std::size_t n = settle + 8 * 128 + 1;
    std::vector<double> drive(n);
    for (std::size_t j = 0; j < n; ++j) drive[j] = 0.5 + amp * std::sin(2 * kPi * f * static_cast<double>(j) / fs);
    auto out = laser::simulate_power(drive, fs, bias, p);
    out.pop_back();
    const auto got = tone(out, settle, fs, f);
    const auto want = linear_response(p, bias.i_bias, ss, f) * amp * bias.i_pp * std::complex<double>(0.0, -1.0);
    const double mag = std::abs(std::abs(got) / std::abs(want) - 1.0);
    const double phase = std::abs(std::arg(got / want)) * 180.0 / kPi;
    note(fmt("f/f_R %.2f  |H| error %.3f%%  phase error %.3f deg", ratio, 100 * mag, phase));
    worst_mag = std::max(worst_mag, mag);
    worst_phase = std::max(worst_phase, phase);
  }
  return {worst_mag < 0.02 && worst_phase < 3.0,
          fmt("f_R %.3f GHz, worst magnitude %.3f%%, worst phase %.3f deg", fr / 1e9, 100 * worst_mag, worst_phase)};
}

// ---- 2. solver self-convergence

Outcome c2_self_convergence() {
  const laser::LaserParams p;
  const auto bias = laser::BiasMap::defaults_for(p);
  const double fs = 32.0 * laser::relaxation_frequency(p, bias.i_bias);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> lvl(0, 3);
  std::vector<double> drive;
  while (drive.size() < 1024) drive.insert(drive.end(), 32, lvl(rng) / 3.0);
  const laser::SolverConfig base;
  laser::SolverConfig half = base;
  half.rel_tol /= 2;
  half.abs_tol /= 2;
  const auto a = laser::detect_and_normalize(laser::simulate_power(drive, fs, bias, p, base)).values;
  const auto b = laser::detect_and_normalize(laser::simulate_power(drive, fs, bias, p, half)).values;
  double ss = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) ss += (a[j] - b[j]) * (a[j] - b[j]);
  const double rms = std::sqrt(ss / static_cast<double>(a.size()));

  const auto flat = laser::simulate_power(std::vector<double>(1024, 0.5), fs, bias, p);
  const double ref = laser::steady_state(bias.i_bias, p).photons;
  double ripple = 0.0;
  for (double v : flat) ripple = std::max(ripple, std::abs(v / ref - 1.0));
  return {rms < 1e-7 && ripple < 1e-6, fmt("halved-tolerance RMS change %.3e, steady ripple %.3e", rms, ripple)};
}

// ---- 3. gradients

Outcome c3_gradcheck() {
  const std::size_t T = 64;
  const auto x = uniform_signal(2 * T, 12), y = uniform_signal(2 * T, 13);
  bool ok = true;
  std::string detail;
  for (auto k : kAllKinds) {
    const auto m = surrogate::init_model(surrogate::ModelHyper::make(k, surrogate::Profile::desk), 21);
    const ad::Tensor xt({2, T}, x), yt({2, T}, y);
    auto loss = [&](ad::Tape& tape) {
      return ad::reduce_mean(tape, ad::square(tape, ad::sub(tape, surrogate::forward(tape, m, xt), yt)));
    };
    ad::GradcheckOptions opts;
    opts.samples_per_tensor = k == surrogate::ModelKind::volterra ? 0 : (k == surrogate::ModelKind::cat ? 2 : 8);
    opts.seed = 5;
    opts.extrapolate = true;
    opts.step_scale = k == surrogate::ModelKind::lstm ? 1e-4 : 1e-5;
    const auto r = ad::gradcheck(loss, m.params, opts);
    const bool pass = r.passed && r.entries.size() >= 20;
    note(fmt("%-8s %4zu entries, max rel err %.2e", surrogate::to_string(k).c_str(), r.entries.size(), r.max_rel_error));
    ok = ok && pass;
    detail += fmt("%s %.1e; ", surrogate::to_string(k).c_str(), r.max_rel_error);
  }
  const std::size_t B = 2;
  auto ng = ad::Tape::no_grad();
  const auto lagged = ad::lag_matrix(ng, ad::Tensor({B, T}, uniform_signal(B * T, 4)), eq::kTaps);
  const ad::Tensor target({B * T, 1}, uniform_signal(B * T, 5));
  std::vector<double> w(B * T, 1.0);
  for (std::size_t i = 0; i < 3; ++i) w[i] = w[T + i] = 0.0;
  const ad::Tensor weight({B * T, 1}, w);
  ad::Tensor taps({eq::kTaps, 1}, uniform_signal(eq::kTaps, 6, -0.5, 0.5), true);
  const auto r = ad::gradcheck([&](ad::Tape& tape) { return eq::eq_loss(tape, taps, lagged, target, weight); }, taps);
  note(fmt("fir      %4zu entries, max rel err %.2e", r.entries.size(), r.max_rel_error));
  ok = ok && r.passed && r.entries.size() >= 20;
  detail += fmt("fir %.1e", r.max_rel_error);
  return {ok, detail};
}

// ---- 4. causality

Outcome c4_causality() {
  std::mt19937_64 rng(2024);
  std::map<std::string, int> violations;
  auto probe = [&](const std::string& name, const std::function<std::vector<double>(const std::vector<double>&)>& f) {
    int v = 0;
    for (int trial = 0; trial < 100; ++trial) {
      auto x = uniform_signal(256, rng());
      const auto base = f(x);
      const auto t0 = std::uniform_int_distribution<std::size_t>(0, 255)(rng);
      x[t0] += std::uniform_real_distribution<double>(0.1, 1.0)(rng);
      const auto moved = f(x);
      for (std::size_t t = 0; t < t0; ++t) v += moved[t] != base[t];
    }
    violations[name] = v;
    note(fmt("%-8s 100 trials, %d violations", name.c_str(), v));
  };
  for (auto k : kAllKinds) {
    const auto m = surrogate::init_model(surrogate::ModelHyper::make(k, surrogate::Profile::desk), 5);
    probe(surrogate::to_string(k), [&](const std::vector<double>& x) { return surrogate::predict(m, {x})[0]; });
  }
  eq::FirEqualizer fir;
  fir.taps = uniform_signal(eq::kTaps, 3, -1.0, 1.0);
  probe("fir", [&](const std::vector<double>& x) { return eq::fir_apply(fir, x); });
  int total = 0;
  for (const auto& [_, v] : violations) total += v;
  return {total == 0, fmt("%d violations over 500 trials", total)};
}

// ---- 5. Volterra against least squares

// Stable least squares over all training samples: running R factor of [A | y],
// one 1024-row block at a time.
double least_squares_nrmse(const stim::Dataset& ds, int M) {
  const int P = 1 + M + M * (M + 1) / 2;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(0, P + 1);
  double n = 0.0;
  for (const auto& s : ds.train) {
    const int T = static_cast<int>(s.drive.size());
    Eigen::MatrixXd blk(R.rows() + T, P + 1);
    blk.topRows(R.rows()) = R;
    for (int t = 0; t < T; ++t) {
      auto lag = [&](int i) { return t - i >= 0 ? s.drive[static_cast<std::size_t>(t - i)] : 0.0; };
      auto row = blk.row(R.rows() + t);
      int c = 0;
      row(c++) = 1.0;
      for (int i = 0; i < M; ++i) row(c++) = lag(i);
      for (int i = 0; i < M; ++i) {
        for (int j = i; j < M; ++j) row(c++) = lag(i) * lag(j);
      }
      row(P) = s.target[static_cast<std::size_t>(t)];
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(blk);
    const int r = std::min<int>(static_cast<int>(blk.rows()), P + 1);
    R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    n += T;
  }
  // The residual norm of min |A theta - y| is the last diagonal entry of R.
  return std::sqrt(R(P, P) * R(P, P) / n);
}

Outcome c5_volterra_oracle() {
  auto spec = stim::StimulusSpec::desk(0.1, 1);
  const auto ds = stim::generate_dataset(spec, stim::LinkConfig::defaults());
  const auto hyper = surrogate::ModelHyper::make(surrogate::ModelKind::volterra, surrogate::Profile::desk);
  const double optimum = least_squares_nrmse(ds, hyper.memory);
  auto cfg = train::TrainConfig::defaults_for(surrogate::ModelKind::volterra, surrogate::Profile::desk);
  cfg.epochs = 1000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = train::train_surrogate(surrogate::init_model(hyper, 1), ds, cfg, [&](const train::EpochRecord& e) {
    if (e.epoch % 200 == 0) note(fmt("epoch %zu val_nrmse %.6f", e.epoch, e.val_nrmse));
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double trained = train::evaluate(r.model, ds.train);
  const double gap = trained - optimum;
  note(fmt("least-squares optimum %.6f, Adam %.6f after %zu epochs (%.0f s)", optimum, trained, cfg.epochs, secs));
  return {std::abs(gap) <= 1e-4, fmt("training NRMSE gap %.3e (limit 1e-4)", gap)};
}

// ---- 6. stimulus statistics

Outcome c6_stimulus() {
  bool ok = true;
  std::string detail;
  const std::size_t n = 100000;

  auto rng = keyed_engine(6, Stream::test_draws, 0);
  const auto pulses = stim::random_pulse(static_cast<int>(n), rng);
  const double d_pulse =
      oracle::ks_statistic(pulses, [](double v) { return oracle::folded_normal_cdf(v, 0.5, 1.0); });
  ok = ok && d_pulse < oracle::ks_critical_1pct(n);

  auto rng2 = keyed_engine(6, Stream::test_draws, 1);
  std::vector<double> t0s, orders;
  for (int i = 0; t0s.size() < n; ++i) {
    const auto s = stim::draw_shape_params(i, 1.0, 32, rng2);
    if (!s.super_gaussian) continue;
    t0s.push_back(s.t0);
    orders.push_back(s.order);
  }
  const double d_t0 =
      oracle::ks_statistic(t0s, [](double v) { return oracle::truncated_folded_normal_cdf(v, 0.25, 1.0, 1.0 / 32); });
  const double d_n = oracle::ks_statistic(orders, [](double v) { return std::clamp((v - 1.0) / 5.0, 0.0, 1.0); });
  ok = ok && d_t0 < oracle::ks_critical_1pct(n) && d_n < oracle::ks_critical_1pct(n);

  const auto spec = stim::StimulusSpec::desk(0.5, 6);
  std::vector<std::size_t> counts(4, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; total < n; ++i) {
    auto r = keyed_engine(6, Stream::train_sequence, i);
    for (int s : stim::build_drive_sequence(spec, 2.5e9, r).symbols) ++counts[static_cast<std::size_t>(s)], ++total;
  }
  const double chi2 = oracle::chi_square_uniform(counts);
  ok = ok && chi2 < oracle::kChiSquare3dof1pct;

  auto small = stim::StimulusSpec::desk(0.54, 6);
  small.n_train_seq = 4;
  small.n_val_samples = 2 * 1024;
  const auto a = stim::generate_dataset(small, stim::LinkConfig::defaults());
  const auto b = stim::generate_dataset(small, stim::LinkConfig::defaults());
  bool identical = a.train.size() == b.train.size();
  for (std::size_t i = 0; identical && i < a.train.size(); ++i) {
    identical = std::memcmp(a.train[i].drive.data(), b.train[i].drive.data(), a.train[i].drive.size() * 8) == 0 &&
                std::memcmp(a.train[i].target.data(), b.train[i].target.data(), a.train[i].target.size() * 8) == 0;
  }
  identical = identical && stim::dataset_hash(a) == stim::dataset_hash(b);
  ok = ok && identical;

  note(fmt("KS pulse %.4f, T0 %.4f, order %.4f (critical %.4f)", d_pulse, d_t0, d_n, oracle::ks_critical_1pct(n)));
  note(fmt("4PAM chi2 %.3f (critical %.3f) over %zu symbols", chi2, oracle::kChiSquare3dof1pct, total));
  note(std::string("bit-identical regeneration: ") + (identical ? "yes" : "no"));
  detail = fmt("KS %.4f/%.4f/%.4f, chi2 %.2f, reproducible %s", d_pulse, d_t0, d_n, chi2, identical ? "yes" : "no");
  return {ok, detail};
}

// ---- 7. distortion trend

Outcome c7_distortion() {
  eval::SweepSpec spec;
  double prev = -1.0;
  bool ok = true;
  std::string detail;
  for (double r : spec.rates) {
    const double d = eval::distortion_nrmse(eval::sweep_dataset(spec, r));
    note(fmt("rate %.2f f_R  un-equalized NRMSE %.5f", r, d));
    ok = ok && d > prev;
    prev = d;
    detail += fmt("%.4f ", d);
  }
  return {ok, detail};
}

// ---- 8. CAT below Volterra at the two highest rates

Outcome c8_model_ordering() {
  int wins = 0, decided = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    eval::SweepSpec spec;
    spec.rates = {0.98, 1.20};
    spec.models = {surrogate::ModelKind::volterra, surrogate::ModelKind::cat};
    spec.data_seed = spec.train_seed = seed;
    spec.epochs = 60;
    const auto rows = eval::run_rate_sweep(spec, [](const std::string& s) { note(s); });
    std::map<double, std::map<surrogate::ModelKind, double>> v;
    for (const auto& row : rows) v[row.rate_fraction][row.model] = row.val_nrmse;
    bool win = true;
    for (double r : spec.rates) {
      const double c = v[r][surrogate::ModelKind::cat], vol = v[r][surrogate::ModelKind::volterra];
      note(fmt("seed %llu rate %.2f: cat %.5f volterra %.5f", static_cast<unsigned long long>(seed), r, c, vol));
      win = win && c < vol;
    }
    wins += win;
    ++decided;
    detail += fmt("seed %llu %s; ", static_cast<unsigned long long>(seed), win ? "holds" : "fails");
    // Two agreeing seeds settle a 2-of-3 vote.
    if (wins >= 2 || decided - wins >= 2) break;
  }
  return {wins >= 2, detail + fmt("%d/%d seeds", wins, decided)};
}

// ---- 9. equalizer sanity

Outcome c9_equalizer() {
  eq::EqRunConfig cfg;
  const auto id = eq::train_equalizer(eq::identity_channel(), cfg);
  const auto d3 = eq::train_equalizer(eq::delay_channel(3), cfg);
  auto spec = stim::StimulusSpec::desk(0.1, 1);
  const auto ds = stim::generate_dataset(spec, stim::LinkConfig::defaults());
  cfg.rate_fraction = 0.1;
  const auto ode = eq::train_equalizer(eq::ode_channel(ds), cfg);
  double off_delta = 0.0;
  for (std::size_t k = 1; k < id.eq.taps.size(); ++k) off_delta = std::max(off_delta, std::abs(id.eq.taps[k]));
  const bool delta_like = id.eq.delay == 0 && std::abs(id.eq.taps[0] - 1.0) < 1e-3 && off_delta < 1e-3;
  note(fmt("identity: NRMSE %.2e, delay %d, tap0 %.6f, max other tap %.2e", id.final_nrmse, id.eq.delay,
           id.eq.taps[0], off_delta));
  note(fmt("delay 3:  NRMSE %.2e, delay %d", d3.final_nrmse, d3.eq.delay));
  note(fmt("ODE 0.1:  NRMSE %.5f -> %.5f", ode.baseline_nrmse, ode.final_nrmse));
  const bool ok = id.final_nrmse < 1e-3 && delta_like && d3.final_nrmse < 1e-3 && ode.final_nrmse < ode.baseline_nrmse;
  return {ok, fmt("identity %.1e, delay-3 %.1e, ODE %.4f vs baseline %.4f", id.final_nrmse, d3.final_nrmse,
                  ode.final_nrmse, ode.baseline_nrmse)};
}

// ---- 10. cross-evaluation harness

Outcome c10_cross_eval(const fs::path& work) {
  eval::SweepSpec spec;
  spec.epochs = 2;
  spec.n_train_seq = 64;
  spec.checkpoint_dir = work / "grid_checkpoints";
  fs::remove_all(spec.checkpoint_dir);
  const eq::EqRunConfig cfg;
  const auto rows = eval::run_equalization_grid(spec, cfg, [](const std::string& s) { note(s); });
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.replay_nrmse - r.train_nrmse));
  const fs::path csv = work / "equalization.csv";
  eval::write_equalization_csv(csv, rows, spec.to_json());

  std::ifstream in(csv);
  std::string line;
  std::size_t values = 0, data_rows = 0;
  bool header = false;
  std::map<std::string, int> per_channel;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = line == "channel,rate_fraction,self_nrmse,ode_nrmse";
      continue;
    }
    std::stringstream ss(line);
    std::string channel, rate, self, ode;
    std::getline(ss, channel, ',');
    std::getline(ss, rate, ',');
    std::getline(ss, self, ',');
    std::getline(ss, ode, ',');
    ++data_rows;
    ++per_channel[channel];
    for (const auto* f : {&self, &ode}) values += !f->empty() && std::isfinite(std::stod(*f));
  }
  bool complete = header && data_rows == 30 && values == 60 && per_channel.size() == 5;
  for (const auto& [_, c] : per_channel) complete = complete && c == 6;
  note(fmt("%zu rows, %zu finite test values, %zu channels", data_rows, values, per_channel.size()));
  return {worst < 1e-9 && complete, fmt("max |replay - logged| %.2e, CSV %s", worst, complete ? "complete" : "incomplete")};
}

// ---- 11. timing

Outcome c11_timing(const fs::path& work) {
  auto spec = stim::StimulusSpec::desk(0.98, 1);
  const auto ds = stim::generate_dataset(spec, stim::LinkConfig::defaults());
  const std::size_t T = static_cast<std::size_t>(spec.seq_len);
  std::vector<eval::ModelTiming> runs;
  for (auto k : kAllKinds) {
    auto cfg = train::TrainConfig::defaults_for(k, surrogate::Profile::desk);
    cfg.epochs = 3;
    const auto r = train::train_surrogate(
        surrogate::init_model(surrogate::ModelHyper::make(k, surrogate::Profile::desk), 1), ds, cfg);
    runs.push_back({surrogate::to_string(k), r.history, ds.train.size() * T, ds.validation.size() * T});
  }
  const auto report = eval::timing_report(runs, ds.ode_seconds / static_cast<double>(ds.ode_samples));
  report.write_csv(work / "timing.csv", {{"dataset_hash", stim::dataset_hash(ds)}});
  std::istringstream table(report.table());
  for (std::string line; std::getline(table, line);) note(line);
  std::string slower;
  for (const auto& m : report.models) {
    if (m.inference_s_per_epoch >= report.ode_s_per_epoch) slower += m.name + " ";
  }
  return {report.all_faster_than_ode(),
          slower.empty() ? "every surrogate infers faster than the solver"
                         : "not faster than the solver: " + slower};
}

struct Criterion {
  const char* name;
  double budget_s;  // 0: no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <1-11|all>\n", argv[0]);
    return 1;
  }
  const fs::path work = fs::current_path() / "acceptance_work";
  fs::create_directories(work);
  const std::map<int, Criterion> criteria{
      {1, {"ODE small-signal fidelity", 60.0, c1_ode_fidelity}},
      {2, {"solver self-convergence", 0.0, c2_self_convergence}},
      {3, {"gradient check", 300.0, c3_gradcheck}},
      {4, {"causality", 0.0, c4_causality}},
      {5, {"Volterra least-squares equivalence", 300.0, c5_volterra_oracle}},
      {6, {"stimulus statistics", 0.0, c6_stimulus}},
      {7, {"distortion trend", 0.0, c7_distortion}},
      {8, {"CAT below Volterra at high rates", 7200.0, c8_model_ordering}},
      {9, {"equalizer sanity", 600.0, c9_equalizer}},
      {10, {"cross-evaluation harness", 0.0, [&] { return c10_cross_eval(work); }}},
      {11, {"timing harness", 0.0, [&] { return c11_timing(work); }}},
  };
  std::vector<int> ids;
  if (std::strcmp(argv[1], "all") == 0) {
    for (const auto& [id, _] : criteria) ids.push_back(id);
  } else {
    const int id = std::atoi(argv[1]);
    if (!criteria.contains(id)) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[1]);
      return 1;
    }
    ids.push_back(id);
  }
  int failures = 0;
  for (int id : ids) {
    const auto& c = criteria.at(id);
    std::printf("criterion %d: %s\n", id, c.name);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [runtime %.0f s exceeds %.0f s]", secs, c.budget_s);
    }
    std::printf("criterion %d %s: %s (%s) [%.1f s]\n", id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
