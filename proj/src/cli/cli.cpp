// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Subcommands over the library. Every subcommand takes --seed, --scale and --out.

#include "dmltwin/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include "dmltwin/equalizer/equalizer.hpp"
#include "dmltwin/errors.hpp"
#include "dmltwin/eval/eval.hpp"
#include "dmltwin/io/config.hpp"
#include "dmltwin/io/container.hpp"
#include "dmltwin/laser/normalize.hpp"
#include "dmltwin/rng.hpp"
#include "dmltwin/surrogates/checkpoint.hpp"
#include "dmltwin/training/train.hpp"

namespace dmltwin {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::uint64_t seed = 1;
  std::string scale = "desk";
  fs::path out;
  fs::path config;

  surrogate::Profile profile() const { return surrogate::parse_profile(scale); }
  json config_json() const { return config.empty() ? json::object() : io::read_json(config); }
  json section(const char* key) const {
    const auto j = config_json();
    return j.contains(key) ? j[key] : json::object();
  }
  stim::LinkConfig link() const {
    const auto j = config_json();
    return j.contains("link") ? io::link_from_json(j["link"]) : stim::LinkConfig::defaults();
  }
};

void add_common(CLI::App* sub, Common& c, bool out_required) {
  sub->add_option("--seed", c.seed, "Seed for every random stream")->capture_default_str();
  sub->add_option("--scale", c.scale, "Scale profile")->check(CLI::IsMember({"desk", "paper"}))->capture_default_str();
  auto* out = sub->add_option("--out", c.out, "Output path");
  if (out_required) out->required();
  sub->add_option("--config", c.config, "JSON config with optional link/train/equalizer sections")
      ->check(CLI::ExistingFile);
}

void say(const std::string& s) { std::cout << s << std::endl; }

eq::Channel channel_from(const std::string& spec, const stim::Dataset& ds) {
  if (spec == "ode") return eq::ode_channel(ds);
  if (spec == "identity") return eq::identity_channel();
  return eq::surrogate_channel(surrogate::load_checkpoint(spec).model);
}

eq::EqRunConfig eq_config(const Common& c, const stim::Dataset& ds) {
  eq::EqRunConfig cfg;
  cfg = eq::eq_config_from_json(c.section("equalizer"), cfg);
  cfg.seed = c.seed;
  cfg.rate_fraction = ds.spec.rate_fraction;
  cfg.sps = ds.spec.sps;
  cfg.seq_len = ds.spec.seq_len;
  cfg.lpf_cutoff = ds.spec.lpf_cutoff;
  return cfg;
}

std::vector<surrogate::ModelKind> parse_models(const std::vector<std::string>& names) {
  std::vector<surrogate::ModelKind> out;
  for (const auto& n : names) out.push_back(surrogate::parse_model_kind(n));
  return out;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"dmltwin: differentiable surrogates of a directly modulated laser link"};
  app.require_subcommand(1);

  // generate-data
  Common gd;
  double gd_rate = 0.98;
  std::optional<std::size_t> gd_train;
  auto* gen = app.add_subcommand("generate-data", "Simulate a paired drive/output dataset");
  add_common(gen, gd, true);
  gen->add_option("--rate", gd_rate, "Symbol rate as a fraction of f_R")->required();
  gen->add_option("--train-seqs", gd_train, "Override the number of training sequences");

  // train
  Common tr;
  std::string tr_model;
  fs::path tr_data;
  std::optional<std::size_t> tr_epochs;
  std::optional<double> tr_lr;
  auto* trn = app.add_subcommand("train", "Train a surrogate on a dataset");
  add_common(trn, tr, true);
  trn->add_option("--model", tr_model, "Model kind")->required()->check(CLI::IsMember({"volterra", "tdnn", "lstm", "cat"}));
  trn->add_option("--data", tr_data, "Dataset file")->required()->check(CLI::ExistingFile);
  trn->add_option("--epochs", tr_epochs, "Override the epoch count");
  trn->add_option("--lr", tr_lr, "Override the learning rate");

  // eval
  Common ev;
  fs::path ev_ckpt, ev_data;
  auto* evl = app.add_subcommand("eval", "Validation NRMSE of a checkpoint");
  add_common(evl, ev, false);
  evl->add_option("--ckpt", ev_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  evl->add_option("--data", ev_data, "Dataset file")->required()->check(CLI::ExistingFile);

  // sweep
  Common sw;
  std::vector<double> sw_rates = eval::default_rates();
  std::vector<std::string> sw_models{"volterra", "tdnn", "lstm", "cat"};
  std::optional<std::size_t> sw_epochs, sw_train;
  fs::path sw_ckpt;
  bool sw_load = false;
  auto* swp = app.add_subcommand("sweep", "Train and score every (rate, model) cell");
  add_common(swp, sw, true);
  swp->add_option("--rates", sw_rates, "Rates as fractions of f_R");
  swp->add_option("--models", sw_models, "Model kinds");
  swp->add_option("--epochs", sw_epochs, "Override the epoch count");
  swp->add_option("--train-seqs", sw_train, "Override the number of training sequences");
  swp->add_option("--checkpoints", sw_ckpt, "Checkpoint directory");
  swp->add_flag("--load-only", sw_load, "Score stored checkpoints instead of training");

  // train-eq
  Common te;
  std::string te_channel;
  fs::path te_data;
  auto* teq = app.add_subcommand("train-eq", "Train the FIR equalizer through a channel");
  add_common(teq, te, true);
  teq->add_option("--channel", te_channel, "Checkpoint file, 'ode' or 'identity'")->required();
  teq->add_option("--data", te_data, "Dataset fixing the rate, grid and output normalisation")
      ->required()
      ->check(CLI::ExistingFile);

  // cross-eval
  Common ce;
  fs::path ce_eq, ce_data;
  std::string ce_channel = "ode";
  bool ce_grid = false, ce_load = false;
  std::vector<double> ce_rates = eval::default_rates();
  std::vector<std::string> ce_models{"volterra", "tdnn", "lstm", "cat"};
  std::optional<std::size_t> ce_epochs, ce_train;
  fs::path ce_ckpt;
  auto* cev = app.add_subcommand("cross-eval", "Test equalizer taps on another channel, or run the full grid");
  add_common(cev, ce, false);
  cev->add_option("--eq", ce_eq, "Equalizer file")->check(CLI::ExistingFile);
  cev->add_option("--channel", ce_channel, "Checkpoint file, 'ode' or 'identity'");
  cev->add_option("--data", ce_data, "Dataset file")->check(CLI::ExistingFile);
  cev->add_flag("--grid", ce_grid, "Every channel x rate cell, self and ODE tests");
  cev->add_option("--rates", ce_rates, "Grid rates");
  cev->add_option("--models", ce_models, "Grid surrogate kinds");
  cev->add_option("--epochs", ce_epochs, "Grid surrogate epochs");
  cev->add_option("--train-seqs", ce_train, "Grid training-set size");
  cev->add_option("--checkpoints", ce_ckpt, "Checkpoint directory reused or filled by the grid");
  cev->add_flag("--load-only", ce_load, "Require stored checkpoints");

  // eye
  Common ey;
  double ey_rate = 0.98;
  std::size_t ey_symbols = 512;
  std::string ey_source = "ode";
  auto* eye = app.add_subcommand("eye", "Eye diagram of a 4PAM Gaussian pulse train");
  add_common(eye, ey, true);
  eye->add_option("--rate", ey_rate, "Symbol rate as a fraction of f_R")->capture_default_str();
  eye->add_option("--symbols", ey_symbols, "Number of symbols")->capture_default_str();
  eye->add_option("--source", ey_source, "ode | drive")->check(CLI::IsMember({"ode", "drive"}))->capture_default_str();

  // report
  Common rp;
  fs::path rp_data;
  std::vector<std::string> rp_hist;
  std::vector<std::string> rp_models{"volterra", "tdnn", "lstm", "cat"};
  std::size_t rp_epochs = 2;
  auto* rep = app.add_subcommand("report", "Per-epoch timing against the ODE solver");
  add_common(rep, rp, true);
  rep->add_option("--data", rp_data, "Dataset file")->required()->check(CLI::ExistingFile);
  rep->add_option("--history", rp_hist, "name=history.csv (repeatable); trains briefly when absent");
  rep->add_option("--models", rp_models, "Models to time when no history is given");
  rep->add_option("--epochs", rp_epochs, "Epochs per timed model")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*gen) {
      auto spec = gd.profile() == surrogate::Profile::paper ? stim::StimulusSpec::paper(gd_rate, gd.seed)
                                                            : stim::StimulusSpec::desk(gd_rate, gd.seed);
      if (gd_train) spec.n_train_seq = *gd_train;
      const auto ds = stim::generate_dataset(spec, gd.link());
      stim::save_dataset(gd.out, ds);
      say("dataset " + gd.out.string() + ": " + std::to_string(ds.train.size()) + " train / " +
          std::to_string(ds.validation.size()) + " validation sequences, f_R = " + std::to_string(ds.f_r / 1e9) +
          " GHz, solver " + std::to_string(ds.ode_seconds) + " s, hash " + stim::dataset_hash(ds));
    } else if (*trn) {
      const auto kind = surrogate::parse_model_kind(tr_model);
      const auto ds = stim::load_dataset(tr_data);
      auto cfg = train::train_config_from_json(tr.section("train"), train::TrainConfig::defaults_for(kind, tr.profile()));
      cfg.seed = tr.seed;
      if (tr_epochs) cfg.epochs = *tr_epochs;
      if (tr_lr) cfg.learning_rate = *tr_lr;
      const auto init = surrogate::init_model(surrogate::ModelHyper::make(kind, tr.profile()), tr.seed);
      const auto r = train::train_surrogate(init, ds, cfg, [](const train::EpochRecord& e) {
        std::printf("epoch %zu train_nmse %.4e val_nrmse %.5f (%.2f s)\n", e.epoch, e.train_nmse, e.val_nrmse,
                    e.train_seconds);
        std::fflush(stdout);
      });
      surrogate::save_checkpoint(tr.out, r.model, r.meta);
      r.history.write_csv(fs::path(tr.out).concat(".history.csv"));
      if (r.history.aborted) std::cerr << "training stopped: " << r.history.abort_reason << "\n";
      say("best epoch " + std::to_string(r.history.best_epoch) + ", val_nrmse " + std::to_string(r.meta.val_nrmse));
    } else if (*evl) {
      const auto loaded = surrogate::load_checkpoint(ev_ckpt);
      const auto ds = stim::load_dataset(ev_data);
      const double v = train::evaluate(loaded.model, ds.validation);
      say("val_nrmse " + std::to_string(v));
      if (!ev.out.empty()) {
        io::write_text(ev.out, eval::meta_lines({{"dataset_hash", stim::dataset_hash(ds)},
                                                 {"train_config_hash", loaded.meta.train_config_hash},
                                                 {"seed", loaded.model.seed}}) +
                                   "model,rate_fraction,val_nrmse\n" + surrogate::to_string(loaded.model.hyper.kind) +
                                   "," + std::to_string(ds.spec.rate_fraction) + "," + std::to_string(v) + "\n");
      }
    } else if (*swp) {
      eval::SweepSpec spec;
      spec.rates = sw_rates;
      spec.models = parse_models(sw_models);
      spec.scale = sw.profile();
      spec.data_seed = spec.train_seed = sw.seed;
      spec.epochs = sw_epochs;
      spec.n_train_seq = sw_train;
      spec.checkpoint_dir = sw_ckpt;
      spec.load_only = sw_load;
      spec.link = sw.link();
      spec.train_overrides = sw.section("train");
      fs::create_directories(sw.out);
      auto meta = spec.to_json();
      meta["config_hash"] = io::config_hash(meta);
      const auto rows = eval::run_rate_sweep(spec, say);
      eval::write_sweep_csv(sw.out / "sweep.csv", rows, meta);
      std::string dist = eval::meta_lines(meta) + "rate_fraction,unequalized_nrmse\n";
      for (double r : spec.rates) dist += std::to_string(r) + "," + std::to_string(eval::distortion_nrmse(eval::sweep_dataset(spec, r))) + "\n";
      io::write_text(sw.out / "distortion.csv", dist);
      say("wrote " + (sw.out / "sweep.csv").string() + " (" + std::to_string(rows.size()) + " rows)");
    } else if (*teq) {
      const auto ds = stim::load_dataset(te_data);
      const auto cfg = eq_config(te, ds);
      const auto ch = channel_from(te_channel, ds);
      const auto r = eq::train_equalizer(ch, cfg);
      if (r.aborted) std::cerr << "equalizer training stopped: " << r.abort_reason << "\n";
      eq::save_equalizer(te.out, r.eq,
                         {{"rate_fraction", cfg.rate_fraction},
                          {"seed", cfg.seed},
                          {"config", eq::to_json(cfg)},
                          {"config_hash", io::config_hash(eq::to_json(cfg))},
                          {"dataset_hash", stim::dataset_hash(ds)},
                          {"baseline_nrmse", r.baseline_nrmse},
                          {"final_nrmse", r.final_nrmse},
                          {"history", r.history}});
      say("channel " + ch.id + " delay " + std::to_string(r.eq.delay) + ": nrmse " + std::to_string(r.baseline_nrmse) +
          " -> " + std::to_string(r.final_nrmse));
    } else if (*cev) {
      if (ce_grid) {
        if (ce.out.empty()) throw ParameterError("cross-eval --grid needs --out");
        eval::SweepSpec spec;
        spec.rates = ce_rates;
        spec.models = parse_models(ce_models);
        spec.scale = ce.profile();
        spec.data_seed = spec.train_seed = ce.seed;
        spec.epochs = ce_epochs;
        spec.n_train_seq = ce_train;
        spec.checkpoint_dir = ce_ckpt;
        spec.load_only = ce_load;
        spec.link = ce.link();
        spec.train_overrides = ce.section("train");
        eq::EqRunConfig cfg = eq::eq_config_from_json(ce.section("equalizer"), eq::EqRunConfig{});
        cfg.seed = ce.seed;
        const auto rows = eval::run_equalization_grid(spec, cfg, say);
        auto meta = spec.to_json();
        meta["equalizer"] = eq::to_json(cfg);
        meta["config_hash"] = io::config_hash(meta);
        eval::write_equalization_csv(ce.out, rows, meta);
        say("wrote " + ce.out.string() + " (" + std::to_string(rows.size()) + " rows)");
      } else {
        if (ce_eq.empty() || ce_data.empty()) throw ParameterError("cross-eval needs --eq and --data (or --grid)");
        const auto ds = stim::load_dataset(ce_data);
        const auto eqz = eq::load_equalizer(ce_eq);
        const auto cfg = eq_config(ce, ds);
        const auto ch = channel_from(ce_channel, ds);
        const double v = eq::cross_evaluate(eqz, ch, cfg);
        const std::string row = eqz.channel + "," + ch.id + "," + std::to_string(cfg.rate_fraction) + "," +
                                std::to_string(v) + "\n";
        std::cout << "eq_channel,test_channel,rate_fraction,nrmse\n" << row;
        if (!ce.out.empty()) {
          io::write_text(ce.out, eval::meta_lines({{"seed", cfg.seed}, {"config_hash", io::config_hash(eq::to_json(cfg))}}) +
                                     "eq_channel,test_channel,rate_fraction,nrmse\n" + row);
        }
      }
    } else if (*eye) {
      const auto link = ey.link();
      const double fs_hz = ey_rate * link.relaxation_frequency() * 32;
      auto rng = keyed_engine(ey.seed, Stream::test_draws);
      const auto drive = eval::gaussian_4pam_drive(ey_symbols, 32, 1.0, rng);
      std::vector<double> wave = drive;
      if (ey_source == "ode") {
        wave = laser::detect_and_normalize(laser::simulate_power(drive, fs_hz, link.bias, link.laser, link.solver)).values;
      }
      const auto d = eval::eye_diagram(wave, 32);
      fs::create_directories(ey.out);
      eval::write_eye_pgm(ey.out / "eye.pgm", d);
      const json meta{{"rate_fraction", ey_rate}, {"seed", ey.seed}, {"source", ey_source}, {"symbols", ey_symbols},
                      {"config_hash", io::config_hash(io::to_json(link))}};
      eval::write_eye_histogram(ey.out / "eye.bin", d, meta);
      say("eye " + (ey.out / "eye.pgm").string() + ", rail separation ratio " +
          std::to_string(eval::rail_separation_ratio(d)));
    } else if (*rep) {
      const auto ds = stim::load_dataset(rp_data);
      const std::size_t T = static_cast<std::size_t>(ds.spec.seq_len);
      std::vector<eval::ModelTiming> runs;
      for (const auto& h : rp_hist) {
        const auto eqpos = h.find('=');
        if (eqpos == std::string::npos) throw ParameterError("--history expects name=path");
        runs.push_back({h.substr(0, eqpos), train::TrainHistory::read_csv(h.substr(eqpos + 1)), ds.train.size() * T,
                        ds.validation.size() * T});
      }
      if (runs.empty()) {
        for (auto kind : parse_models(rp_models)) {
          auto cfg = train::TrainConfig::defaults_for(kind, rp.profile());
          cfg.epochs = rp_epochs;
          cfg.seed = rp.seed;
          const auto r = train::train_surrogate(
              surrogate::init_model(surrogate::ModelHyper::make(kind, rp.profile()), rp.seed), ds, cfg);
          runs.push_back({surrogate::to_string(kind), r.history, ds.train.size() * T, ds.validation.size() * T});
        }
      }
      const auto report = eval::timing_report(runs, ds.ode_seconds / static_cast<double>(ds.ode_samples));
      fs::create_directories(rp.out);
      report.write_csv(rp.out / "timing.csv", {{"dataset_hash", stim::dataset_hash(ds)}, {"seed", rp.seed}});
      std::cout << report.table();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace dmltwin
