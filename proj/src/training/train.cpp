// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Epoch loop, evaluation and grid search.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <numeric>

#include "dmltwin/errors.hpp"
#include "dmltwin/io/config.hpp"
#include "dmltwin/rng.hpp"
#include "dmltwin/training/train.hpp"

namespace dmltwin::train {

using surrogate::ModelKind;
using surrogate::SurrogateModel;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ad::Tensor stack(const std::vector<stim::SequencePair>& split, std::span<const std::size_t> idx, bool drive) {
  const std::size_t T = split[idx[0]].drive.size();
  std::vector<double> flat;
  flat.reserve(idx.size() * T);
  for (auto i : idx) {
    const auto& src = drive ? split[i].drive : split[i].target;
    flat.insert(flat.end(), src.begin(), src.end());
  }
  return ad::Tensor({idx.size(), T}, std::move(flat));
}

void check_grid(const SurrogateModel& m, const stim::Dataset& ds) {
  if (ds.train.empty() || ds.validation.empty()) throw ContractError("train: dataset has an empty split");
  const auto T = static_cast<std::size_t>(ds.spec.seq_len);
  for (const auto* split : {&ds.train, &ds.validation}) {
    for (const auto& s : *split) {
      if (s.drive.size() != T || s.target.size() != T) throw ContractError("train: sequence length differs from seq_len");
    }
  }
  if (m.hyper.kind == ModelKind::cat && T > m.hyper.max_len) {
    throw ContractError("train: seq_len " + std::to_string(T) + " exceeds the CAT positional table");
  }
}

// Loss on one batch with gradients accumulated into the model parameters.
// Attention cost is quadratic in T per sequence, so the CAT runs one sequence per tape.
double batch_loss_and_grad(const SurrogateModel& m, const std::vector<stim::SequencePair>& split,
                           std::span<const std::size_t> idx) {
  const std::size_t T = split[idx[0]].drive.size();
  const double inv_n = 1.0 / static_cast<double>(idx.size() * T);
  const std::size_t micro = m.hyper.kind == ModelKind::cat ? 1 : idx.size();
  double total = 0.0;
  for (std::size_t s = 0; s < idx.size(); s += micro) {
    const auto part = idx.subspan(s, std::min(micro, idx.size() - s));
    ad::Tape tape;
    const auto pred = surrogate::forward(tape, m, stack(split, part, true));
    auto loss = ad::scale(tape, ad::reduce_sum(tape, ad::square(tape, ad::sub(tape, pred, stack(split, part, false)))),
                          inv_n);
    const double value = loss.item();
    if (!std::isfinite(value)) throw NumericalError("non-finite training loss");
    ad::backward(loss, tape);
    total += value;
  }
  return total;
}

}  // namespace

void TrainConfig::validate() const {
  adam().validate();
  if (batch_size == 0) throw ParameterError("train: batch_size must be positive");
}

TrainConfig TrainConfig::defaults_for(ModelKind kind, surrogate::Profile profile) {
  TrainConfig c;
  c.profile = profile;
  c.epochs = profile == surrogate::Profile::paper ? 400 : 60;
  switch (kind) {
    case ModelKind::volterra: c.learning_rate = 1e-2; break;
    case ModelKind::tdnn: c.learning_rate = 1e-3; break;
    case ModelKind::lstm: c.learning_rate = 3e-3; break;
    case ModelKind::cat: c.learning_rate = 1e-3; break;
  }
  return c;
}

double TrainHistory::best_val_nmse() const {
  return best_epoch == 0 ? initial_val_nmse : epochs[static_cast<std::size_t>(best_epoch - 1)].val_nmse;
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write " + path.string());
  out.precision(10);
  out << "epoch,train_nmse,val_nrmse,epoch_seconds,val_seconds\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << e.train_nmse << ',' << e.val_nrmse << ',' << e.train_seconds << ',' << e.val_seconds
        << '\n';
  }
  if (!out) throw FileError("short write to " + path.string());
}

TrainHistory TrainHistory::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("epoch,train_nmse,val_nrmse,epoch_seconds", 0) != 0) {
    throw FileError(path.string() + ": not a training history");
  }
  TrainHistory h;
  double best = std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochRecord e;
    char c1, c2, c3, c4;
    std::istringstream row(line);
    if (!(row >> e.epoch >> c1 >> e.train_nmse >> c2 >> e.val_nrmse >> c3 >> e.train_seconds >> c4 >> e.val_seconds)) {
      throw FileError(path.string() + ": malformed row '" + line + "'");
    }
    e.val_nmse = e.val_nrmse * e.val_nrmse;
    if (e.val_nmse < best) {
      best = e.val_nmse;
      h.best_epoch = static_cast<int>(e.epoch);
    }
    h.epochs.push_back(e);
  }
  h.initial_val_nmse = std::numeric_limits<double>::quiet_NaN();
  return h;
}

double evaluate_nmse(const SurrogateModel& m, const std::vector<stim::SequencePair>& split, std::size_t batch) {
  if (split.empty()) return 0.0;
  std::vector<std::vector<double>> xs;
  xs.reserve(split.size());
  for (const auto& s : split) xs.push_back(s.drive);
  const auto ys = surrogate::predict(m, xs, batch);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    acc += nmse(ys[i], split[i].target) * static_cast<double>(ys[i].size());
    n += ys[i].size();
  }
  return acc / static_cast<double>(n);
}

double evaluate(const SurrogateModel& m, const std::vector<stim::SequencePair>& split, std::size_t batch) {
  return std::sqrt(evaluate_nmse(m, split, batch));
}

TrainResult train_surrogate(const SurrogateModel& init, const stim::Dataset& ds, const TrainConfig& cfg,
                            const EpochCallback& on_epoch) {
  cfg.validate();
  check_grid(init, ds);
  SurrogateModel model = init.clone();
  model.set_requires_grad(true);
  auto state = AdamState::zeros(model.params);
  const auto adam = cfg.adam();

  TrainResult result{init.clone(), {}, {}};
  auto& hist = result.history;
  hist.initial_val_nmse = evaluate_nmse(model, ds.validation);
  double best = hist.initial_val_nmse;

  std::vector<std::size_t> order(ds.train.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    auto rng = keyed_engine(cfg.seed, Stream::shuffle, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    EpochRecord rec;
    rec.epoch = epoch;
    const auto t_epoch = Clock::now();
    double weighted = 0.0;
    try {
      for (std::size_t s = 0; s < order.size(); s += cfg.batch_size) {
        const auto t_batch = Clock::now();
        const auto idx = std::span<const std::size_t>(order).subspan(s, std::min(cfg.batch_size, order.size() - s));
        model.zero_grad();
        weighted += batch_loss_and_grad(model, ds.train, idx) * static_cast<double>(idx.size());
        adam_step(model.params, state, adam);
        rec.batch_seconds.push_back(seconds_since(t_batch));
      }
    } catch (const NumericalError& e) {
      hist.aborted = true;
      hist.abort_reason = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    rec.train_seconds = seconds_since(t_epoch);
    rec.train_nmse = weighted / static_cast<double>(order.size());

    const auto t_val = Clock::now();
    rec.val_nmse = evaluate_nmse(model, ds.validation);
    rec.val_nrmse = std::sqrt(rec.val_nmse);
    rec.val_seconds = seconds_since(t_val);
    if (!std::isfinite(rec.val_nmse)) {
      hist.aborted = true;
      hist.abort_reason = "epoch " + std::to_string(epoch) + ": non-finite validation loss";
      break;
    }
    if (rec.val_nmse < best) {
      best = rec.val_nmse;
      hist.best_epoch = static_cast<int>(epoch);
      result.model = model.clone();
    }
    hist.epochs.push_back(std::move(rec));
    if (on_epoch) on_epoch(hist.epochs.back());
  }

  result.model.seed = init.seed;
  result.meta.train_config_hash = config_hash(cfg, init.hyper);
  result.meta.dataset_hash = stim::dataset_hash(ds);
  result.meta.rate_fraction = ds.spec.rate_fraction;
  result.meta.epoch = hist.best_epoch == 0 ? -1 : hist.best_epoch;
  result.meta.val_nrmse = std::sqrt(best);
  return result;
}

GridResult grid_search(ModelKind kind, const std::vector<surrogate::ModelHyper>& grid, const stim::Dataset& ds,
                       const TrainConfig& cfg) {
  if (grid.empty()) throw ParameterError("grid_search: empty grid");
  GridResult out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].kind != kind) throw ParameterError("grid_search: candidate " + std::to_string(i) + " is not a " +
                                                   surrogate::to_string(kind));
    const auto r = train_surrogate(surrogate::init_model(grid[i], cfg.seed), ds, cfg);
    out.leaderboard.push_back({i, grid[i], r.meta.val_nrmse});
  }
  std::stable_sort(out.leaderboard.begin(), out.leaderboard.end(),
                   [](const GridEntry& a, const GridEntry& b) { return a.val_nrmse < b.val_nrmse; });
  out.best = out.leaderboard.front().hyper;
  return out;
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate}, {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},                 {"eps_adam", cfg.eps_adam},
          {"batch_size", cfg.batch_size},       {"epochs", cfg.epochs},
          {"seed", cfg.seed},                   {"profile", surrogate::to_string(cfg.profile)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base) {
  const std::string where = "train";
  auto opt = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = io::field<std::decay_t<decltype(dst)>>(j, key, where);
  };
  opt("learning_rate", base.learning_rate);
  opt("beta1", base.beta1);
  opt("beta2", base.beta2);
  opt("eps_adam", base.eps_adam);
  opt("batch_size", base.batch_size);
  opt("epochs", base.epochs);
  opt("seed", base.seed);
  if (j.contains("profile")) base.profile = surrogate::parse_profile(io::field<std::string>(j, "profile", where));
  base.validate();
  return base;
}

std::string config_hash(const TrainConfig& cfg, const surrogate::ModelHyper& hyper) {
  return io::config_hash({{"train", to_json(cfg)}, {"model", surrogate::hyper_to_json(hyper)}});
}

}  // namespace dmltwin::train
