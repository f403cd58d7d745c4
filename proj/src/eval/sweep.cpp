// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Symbol-rate sweep, distortion baseline and timing report.

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "dmltwin/errors.hpp"
#include "dmltwin/eval/eval.hpp"
#include "dmltwin/io/config.hpp"
#include "dmltwin/io/container.hpp"
#include "dmltwin/surrogates/checkpoint.hpp"

namespace dmltwin::eval {

using surrogate::ModelKind;

namespace {

// Mean over logged epochs, skipping the warm-up epoch when there is more than one.
template <class F>
double epoch_mean(const std::vector<train::EpochRecord>& epochs, F get, std::size_t* used = nullptr) {
  const std::size_t skip = epochs.size() > 1 ? 1 : 0;
  double sum = 0.0;
  for (std::size_t i = skip; i < epochs.size(); ++i) sum += get(epochs[i]);
  const std::size_t n = epochs.size() - skip;
  if (used) *used = n;
  return n ? sum / static_cast<double>(n) : 0.0;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

std::string meta_lines(const nlohmann::json& meta) {
  std::string out;
  if (!meta.is_object()) return out;
  for (const auto& [k, v] : meta.items()) out += "# " + k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  return out;
}

std::vector<double> default_rates() { return {0.10, 0.32, 0.54, 0.76, 0.98, 1.20}; }

void SweepSpec::validate() const {
  if (rates.empty() || models.empty()) throw ParameterError("sweep: rates and models must be non-empty");
  for (double r : rates) {
    if (!(r > 0.0 && r <= 2.0)) throw ParameterError("sweep: rates must lie in (0, 2]");
  }
  if (load_only && checkpoint_dir.empty()) throw ParameterError("sweep: load-only mode needs a checkpoint directory");
}

nlohmann::json SweepSpec::to_json() const {
  std::vector<std::string> names;
  for (auto m : models) names.push_back(surrogate::to_string(m));
  nlohmann::json j{{"rates", rates},         {"models", names},           {"scale", surrogate::to_string(scale)},
                   {"data_seed", data_seed}, {"train_seed", train_seed}, {"load_only", load_only}};
  if (epochs) j["epochs"] = *epochs;
  if (n_train_seq) j["n_train_seq"] = *n_train_seq;
  return j;
}

std::string cell_name(ModelKind kind, double rate_fraction) {
  std::ostringstream os;
  os << surrogate::to_string(kind) << "_r" << std::fixed << std::setprecision(2) << rate_fraction;
  return os.str();
}

stim::Dataset sweep_dataset(const SweepSpec& spec, double rate_fraction) {
  auto s = spec.scale == surrogate::Profile::paper ? stim::StimulusSpec::paper(rate_fraction, spec.data_seed)
                                                    : stim::StimulusSpec::desk(rate_fraction, spec.data_seed);
  if (spec.n_train_seq) s.n_train_seq = *spec.n_train_seq;
  return stim::generate_dataset(s, spec.link);
}

surrogate::SurrogateModel cell_model(const SweepSpec& spec, const stim::Dataset& ds, ModelKind kind, const Log& log) {
  const auto name = cell_name(kind, ds.spec.rate_fraction);
  const auto ckpt = spec.checkpoint_dir / (name + ".ckpt");
  if (!spec.checkpoint_dir.empty() && std::filesystem::exists(ckpt)) return surrogate::load_checkpoint(ckpt).model;
  if (spec.load_only) throw FileError("missing checkpoint for cell " + name + " (" + ckpt.string() + ")");
  auto cfg = train::train_config_from_json(spec.train_overrides, train::TrainConfig::defaults_for(kind, spec.scale));
  cfg.seed = spec.train_seed;
  if (spec.epochs) cfg.epochs = *spec.epochs;
  const auto r = train::train_surrogate(surrogate::init_model(surrogate::ModelHyper::make(kind, spec.scale), spec.train_seed),
                                        ds, cfg);
  if (log) log(name + " trained: " + std::to_string(r.history.epochs.size()) + " epochs");
  if (!spec.checkpoint_dir.empty()) {
    std::filesystem::create_directories(spec.checkpoint_dir);
    surrogate::save_checkpoint(ckpt, r.model, r.meta);
  }
  return r.model;
}

std::vector<SweepRow> run_rate_sweep(const SweepSpec& spec, const Log& log) {
  spec.validate();
  std::vector<SweepRow> rows;
  for (double rate : spec.rates) {
    const auto ds = sweep_dataset(spec, rate);
    for (auto kind : spec.models) {
      const auto name = cell_name(kind, rate);
      const auto ckpt = spec.checkpoint_dir / (name + ".ckpt");
      SweepRow row{rate, kind, 0.0, 0.0, 0.0};
      if (spec.load_only) {
        if (!std::filesystem::exists(ckpt)) throw FileError("sweep: missing checkpoint for cell " + name + " (" + ckpt.string() + ")");
        const auto loaded = surrogate::load_checkpoint(ckpt);
        const auto t0 = std::chrono::steady_clock::now();
        row.val_nrmse = train::evaluate(loaded.model, ds.validation);
        row.eval_s_per_epoch = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      } else {
        auto cfg = train::train_config_from_json(spec.train_overrides, train::TrainConfig::defaults_for(kind, spec.scale));
        cfg.seed = spec.train_seed;
        if (spec.epochs) cfg.epochs = *spec.epochs;
        const auto init = surrogate::init_model(surrogate::ModelHyper::make(kind, spec.scale), spec.train_seed);
        const auto r = train::train_surrogate(init, ds, cfg);
        row.val_nrmse = r.meta.val_nrmse;
        row.train_s_per_epoch = epoch_mean(r.history.epochs, [](const auto& e) { return e.train_seconds; });
        row.eval_s_per_epoch = epoch_mean(r.history.epochs, [](const auto& e) { return e.val_seconds; });
        if (!spec.checkpoint_dir.empty()) {
          std::filesystem::create_directories(spec.checkpoint_dir);
          surrogate::save_checkpoint(ckpt, r.model, r.meta);
        }
      }
      if (log) log(name + " val_nrmse=" + fmt(row.val_nrmse));
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<EqGridRow> run_equalization_grid(const SweepSpec& spec, const eq::EqRunConfig& eq_cfg, const Log& log) {
  spec.validate();
  std::vector<EqGridRow> rows;
  for (double rate : spec.rates) {
    const auto ds = sweep_dataset(spec, rate);
    auto cfg = eq_cfg;
    cfg.rate_fraction = rate;
    cfg.sps = ds.spec.sps;
    cfg.seq_len = ds.spec.seq_len;
    cfg.lpf_cutoff = ds.spec.lpf_cutoff;
    const auto ode = eq::ode_channel(ds);
    const auto train_stream = eq::stream_for(cfg, eq::EvalStream::training);
    const auto test_stream = eq::stream_for(cfg, eq::EvalStream::held_out);
    const auto ode_test = ode.apply(test_stream.waveform);

    std::vector<eq::Channel> channels;
    for (auto kind : spec.models) channels.push_back(eq::surrogate_channel(cell_model(spec, ds, kind, log)));
    channels.push_back(ode);
    for (const auto& ch : channels) {
      const auto received = ch.apply(train_stream.waveform);
      const auto r = eq::train_equalizer_on(received, train_stream, cfg, ch.id);
      EqGridRow row;
      row.channel = ch.id;
      row.rate_fraction = rate;
      row.train_nrmse = r.final_nrmse;
      row.baseline_nrmse = r.baseline_nrmse;
      row.replay_nrmse = eq::eq_nrmse(r.eq, ch.apply(train_stream.waveform), train_stream.waveform);
      row.self_nrmse = ch.id == "ode" ? eq::eq_nrmse(r.eq, ode_test, test_stream.waveform)
                                      : eq::eq_nrmse(r.eq, ch.apply(test_stream.waveform), test_stream.waveform);
      row.ode_nrmse = eq::eq_nrmse(r.eq, ode_test, test_stream.waveform);
      if (log) log(ch.id + " @ " + fmt(rate) + ": self=" + fmt(row.self_nrmse) + " ode=" + fmt(row.ode_nrmse));
      rows.push_back(row);
    }
  }
  return rows;
}

void write_equalization_csv(const std::filesystem::path& path, const std::vector<EqGridRow>& rows,
                            const nlohmann::json& meta) {
  std::string out = meta_lines(meta);
  out += "channel,rate_fraction,self_nrmse,ode_nrmse\n";
  for (const auto& r : rows) {
    out += r.channel + "," + fmt(r.rate_fraction) + "," + fmt(r.self_nrmse) + "," + fmt(r.ode_nrmse) + "\n";
  }
  io::write_text(path, out);
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows, const nlohmann::json& meta,
                     bool with_timing) {
  std::string out = meta_lines(meta);
  out += with_timing ? "rate_fraction,model,val_nrmse,train_s_per_epoch,eval_s_per_epoch\n"
                     : "rate_fraction,model,val_nrmse\n";
  for (const auto& r : rows) {
    out += fmt(r.rate_fraction) + "," + surrogate::to_string(r.model) + "," + fmt(r.val_nrmse);
    if (with_timing) out += "," + fmt(r.train_s_per_epoch) + "," + fmt(r.eval_s_per_epoch);
    out += "\n";
  }
  io::write_text(path, out);
}

double distortion_nrmse(const stim::Dataset& ds) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& s : ds.validation) {
    acc += train::nmse(s.drive, s.target) * static_cast<double>(s.drive.size());
    n += s.drive.size();
  }
  if (n == 0) throw ContractError("distortion_nrmse: empty validation split");
  return std::sqrt(acc / static_cast<double>(n));
}

bool TimingReport::all_faster_than_ode() const {
  for (const auto& m : models) {
    if (!(m.inference_s_per_epoch < ode_s_per_epoch)) return false;
  }
  return !models.empty();
}

std::string TimingReport::table() const {
  std::ostringstream os;
  os << std::left << std::setw(10) << "model" << std::right << std::setw(14) << "train_s" << std::setw(14) << "val_s"
     << std::setw(14) << "infer_s" << std::setw(10) << "vs_ode" << "\n";
  for (const auto& m : models) {
    os << std::left << std::setw(10) << m.name << std::right << std::scientific << std::setprecision(3)
       << std::setw(14) << m.train_s_per_epoch << std::setw(14) << m.val_s_per_epoch << std::setw(14)
       << m.inference_s_per_epoch << std::fixed << std::setprecision(2) << std::setw(10)
       << m.inference_s_per_epoch / ode_s_per_epoch << "\n";
  }
  os << std::left << std::setw(10) << "ode" << std::right << std::scientific << std::setprecision(3) << std::setw(14)
     << ode_s_per_epoch << std::setw(14) << "-" << std::setw(14) << ode_s_per_epoch << std::fixed << std::setw(10)
     << 1.0 << "\n";
  os << "samples per epoch: " << samples_per_epoch << "\n";
  return os.str();
}

void TimingReport::write_csv(const std::filesystem::path& path, const nlohmann::json& meta) const {
  std::string out = meta_lines(meta);
  out += "name,train_s_per_epoch,val_s_per_epoch,inference_s_per_epoch,epochs_used\n";
  for (const auto& m : models) {
    out += m.name + "," + fmt(m.train_s_per_epoch) + "," + fmt(m.val_s_per_epoch) + "," +
           fmt(m.inference_s_per_epoch) + "," + std::to_string(m.epochs_used) + "\n";
  }
  out += "ode,," + std::string(",") + fmt(ode_s_per_epoch) + ",\n";
  io::write_text(path, out);
}

TimingReport timing_report(const std::vector<ModelTiming>& runs, double ode_seconds_per_sample) {
  if (runs.empty()) throw ParameterError("timing_report: no histories");
  TimingReport rep;
  rep.samples_per_epoch = runs.front().train_samples;
  rep.ode_s_per_epoch = ode_seconds_per_sample * static_cast<double>(rep.samples_per_epoch);
  for (const auto& r : runs) {
    if (r.history.epochs.empty() || r.val_samples == 0) {
      throw ParameterError("timing_report: run '" + r.name + "' has no logged epochs");
    }
    TimingRow row;
    row.name = r.name;
    row.train_s_per_epoch = epoch_mean(r.history.epochs, [](const auto& e) { return e.train_seconds; }, &row.epochs_used);
    row.val_s_per_epoch = epoch_mean(r.history.epochs, [](const auto& e) { return e.val_seconds; });
    row.inference_s_per_epoch = row.val_s_per_epoch * static_cast<double>(rep.samples_per_epoch) /
                                static_cast<double>(r.val_samples);
    rep.models.push_back(row);
  }
  return rep;
}

}  // namespace dmltwin::eval
