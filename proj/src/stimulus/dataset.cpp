// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/stimulus/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "dmltwin/errors.hpp"
#include "dmltwin/io/config.hpp"
#include "dmltwin/io/container.hpp"
#include "dmltwin/rng.hpp"
#include "dmltwin/stimulus/filter.hpp"

namespace dmltwin::stim {

StimulusSpec StimulusSpec::paper(double rate_fraction, std::uint64_t seed) {
  StimulusSpec s;
  s.rate_fraction = rate_fraction;
  s.seed = seed;
  s.n_train_seq = 1u << 13;
  s.n_val_samples = 1u << 17;
  return s;
}

StimulusSpec StimulusSpec::desk(double rate_fraction, std::uint64_t seed) {
  StimulusSpec s;
  s.rate_fraction = rate_fraction;
  s.seed = seed;
  s.n_train_seq = 1u << 9;
  s.n_val_samples = 32u * 1024u;
  return s;
}

void StimulusSpec::validate() const {
  if (!(rate_fraction > 0.0 && rate_fraction <= 2.0)) throw ParameterError("stimulus: rate_fraction must lie in (0, 2]");
  if (sps <= 0 || seq_len <= 0 || block_len <= 0) throw ParameterError("stimulus: sps, seq_len, block_len must be positive");
  if (seq_len % sps != 0) throw ParameterError("stimulus: seq_len must be a multiple of sps");
  if (symbols_per_sequence() % block_len != 0) {
    throw ParameterError("stimulus: block_len must divide the symbols per sequence");
  }
  if (n_train_seq == 0) throw ParameterError("stimulus: n_train_seq must be positive");
  if (n_val_samples % static_cast<std::size_t>(seq_len) != 0 || n_val_samples == 0) {
    throw ParameterError("stimulus: n_val_samples must be a positive multiple of seq_len");
  }
  if (!(lpf_cutoff > 0.0 && lpf_cutoff < 0.5 * sps)) throw ParameterError("stimulus: lpf_cutoff must lie in (0, sps/2)");
}

LinkConfig LinkConfig::defaults() {
  LinkConfig l;
  l.bias = laser::BiasMap::defaults_for(l.laser);
  return l;
}

double LinkConfig::relaxation_frequency() const { return laser::relaxation_frequency(laser, bias.i_bias); }

DriveSequence build_drive_sequence(const StimulusSpec& spec, double symbol_rate, std::mt19937_64& rng) {
  spec.validate();
  const double t_sym = 1.0 / symbol_rate;
  const int n_sym = spec.symbols_per_sequence();
  std::uniform_int_distribution<int> pam(0, 3);

  DriveSequence out;
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(spec.seq_len));
  ShapeDraw shape;
  std::vector<double> sg;
  for (int s = 0; s < n_sym; ++s) {
    if (s % spec.block_len == 0) {
      shape = draw_shape_params(s / spec.block_len, t_sym, spec.sps, rng);
      out.shapes.push_back(shape);
      if (shape.super_gaussian) sg = supergaussian_pulse(shape.t0, shape.order, t_sym, spec.sps);
    }
    const int sym = pam(rng);
    out.symbols.push_back(sym);
    const auto pulse = shape.super_gaussian ? sg : random_pulse(spec.sps, rng);
    for (double v : pulse) raw.push_back(kPamLevels[sym] * v);
  }

  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double range = *hi - *lo;
  const double base = *lo;
  if (range > 0.0) {
    for (auto& v : raw) v = (v - base) / range;
  } else {
    std::fill(raw.begin(), raw.end(), 0.0);
  }
  const double fs = symbol_rate * spec.sps;
  out.waveform = lowpass_filter(raw, spec.lpf_cutoff * symbol_rate, fs);
  return out;
}

namespace {

SequencePair make_pair(const StimulusSpec& spec, const LinkConfig& link, double symbol_rate, Stream stream,
                       std::size_t index, double& ode_seconds) {
  auto rng = keyed_engine(spec.seed, stream, index);
  auto drive = build_drive_sequence(spec, symbol_rate, rng);
  SequencePair p;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    p.target = laser::simulate_power(drive.waveform, symbol_rate * spec.sps, link.bias, link.laser, link.solver);
  } catch (const NumericalError& e) {
    std::ostringstream os;
    os << "sequence " << index << (stream == Stream::train_sequence ? " (train)" : " (validation)") << ": "
       << e.what();
    throw NumericalError(os.str());
  }
  ode_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  p.drive = std::move(drive.waveform);
  p.symbols = std::move(drive.symbols);
  p.shapes = std::move(drive.shapes);
  return p;
}

}  // namespace

Dataset generate_dataset(const StimulusSpec& spec, const LinkConfig& link) {
  spec.validate();
  link.laser.validate();
  link.bias.validate();
  link.solver.validate();

  Dataset ds;
  ds.spec = spec;
  ds.link = link;
  ds.f_r = link.relaxation_frequency();
  ds.symbol_rate = spec.rate_fraction * ds.f_r;
  ds.sample_rate = ds.symbol_rate * spec.sps;

  for (std::size_t i = 0; i < spec.n_train_seq; ++i) {
    ds.train.push_back(make_pair(spec, link, ds.symbol_rate, Stream::train_sequence, i, ds.ode_seconds));
  }
  for (std::size_t i = 0; i < spec.n_val_seq(); ++i) {
    ds.validation.push_back(make_pair(spec, link, ds.symbol_rate, Stream::validation_sequence, i, ds.ode_seconds));
  }
  ds.ode_samples = (ds.train.size() + ds.validation.size()) * static_cast<std::size_t>(spec.seq_len);

  double lo = ds.train[0].target[0], hi = lo;
  for (const auto& p : ds.train) {
    const auto r = laser::min_max_of(p.target);
    lo = std::min(lo, r.min);
    hi = std::max(hi, r.max);
  }
  ds.target_record = {lo, hi};
  ds.target_record.validate();
  for (auto* split : {&ds.train, &ds.validation}) {
    for (auto& p : *split) p.target = laser::normalize(p.target, ds.target_record);
  }
  return ds;
}

std::vector<double> ode_power(const Dataset& ds, const std::vector<double>& drive) {
  return laser::simulate_power(drive, ds.sample_rate, ds.link.bias, ds.link.laser, ds.link.solver);
}

namespace {

io::Container to_container(const Dataset& ds) {
  io::Container c;
  c.header = {{"kind", "dataset"},
              {"format_version", Dataset::kFormatVersion},
              {"stimulus", io::to_json(ds.spec)},
              {"link", io::to_json(ds.link)},
              {"f_r", ds.f_r},
              {"symbol_rate", ds.symbol_rate},
              {"sample_rate", ds.sample_rate},
              {"target_record", io::to_json(ds.target_record)},
              {"n_train", ds.train.size()},
              {"n_validation", ds.validation.size()},
              {"ode_seconds", ds.ode_seconds},
              {"ode_samples", ds.ode_samples}};
  const auto len = static_cast<std::size_t>(ds.spec.seq_len);
  const auto nsym = static_cast<std::size_t>(ds.spec.symbols_per_sequence());
  const auto nblk = nsym / static_cast<std::size_t>(ds.spec.block_len);
  auto pack = [&](const std::vector<SequencePair>& split, const std::string& prefix) {
    io::NamedArray drive{prefix + "_drive", {split.size(), len}, {}};
    io::NamedArray target{prefix + "_target", {split.size(), len}, {}};
    io::NamedArray symbols{prefix + "_symbols", {split.size(), nsym}, {}};
    io::NamedArray shapes{prefix + "_shapes", {split.size(), nblk, 3}, {}};
    for (const auto& p : split) {
      drive.data.insert(drive.data.end(), p.drive.begin(), p.drive.end());
      target.data.insert(target.data.end(), p.target.begin(), p.target.end());
      for (int s : p.symbols) symbols.data.push_back(s);
      for (const auto& sh : p.shapes) {
        shapes.data.insert(shapes.data.end(), {sh.super_gaussian ? 1.0 : 0.0, sh.t0, sh.order});
      }
    }
    c.arrays.push_back(std::move(drive));
    c.arrays.push_back(std::move(target));
    c.arrays.push_back(std::move(symbols));
    c.arrays.push_back(std::move(shapes));
  };
  pack(ds.train, "train");
  pack(ds.validation, "validation");
  return c;
}

}  // namespace

std::string dataset_hash(const Dataset& ds) {
  auto c = to_container(ds);
  // Wall-clock fields do not belong to the content.
  c.header.erase("ode_seconds");
  return io::content_hash(c);
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) { io::write_container(path, to_container(ds)); }

Dataset load_dataset(const std::filesystem::path& path) {
  const auto c = io::read_container(path);
  const auto& h = c.header;
  if (io::field<std::string>(h, "kind", "dataset") != "dataset") {
    throw FileError("'" + path.string() + "' is not a dataset container");
  }
  if (io::field<int>(h, "format_version", "dataset") != Dataset::kFormatVersion) {
    throw FileError("'" + path.string() + "': unsupported dataset format version");
  }
  Dataset ds;
  ds.spec = io::stimulus_from_json(io::field<io::json>(h, "stimulus", "dataset"), "dataset.stimulus");
  ds.link = io::link_from_json(io::field<io::json>(h, "link", "dataset"), "dataset.link");
  ds.f_r = io::field<double>(h, "f_r", "dataset");
  ds.symbol_rate = io::field<double>(h, "symbol_rate", "dataset");
  ds.sample_rate = io::field<double>(h, "sample_rate", "dataset");
  ds.target_record = io::record_from_json(io::field<io::json>(h, "target_record", "dataset"), "dataset.target_record");
  ds.ode_seconds = io::field<double>(h, "ode_seconds", "dataset");
  ds.ode_samples = io::field<std::size_t>(h, "ode_samples", "dataset");

  const auto len = static_cast<std::size_t>(ds.spec.seq_len);
  const auto nsym = static_cast<std::size_t>(ds.spec.symbols_per_sequence());
  const auto nblk = nsym / static_cast<std::size_t>(ds.spec.block_len);
  auto unpack = [&](const std::string& prefix, std::size_t count) {
    const auto& drive = c.array(prefix + "_drive");
    const auto& target = c.array(prefix + "_target");
    const auto& symbols = c.array(prefix + "_symbols");
    const auto& shapes = c.array(prefix + "_shapes");
    if (drive.data.size() != count * len || target.data.size() != count * len || symbols.data.size() != count * nsym ||
        shapes.data.size() != count * nblk * 3) {
      throw FileError("'" + path.string() + "': " + prefix + " arrays do not match the declared sizes");
    }
    std::vector<SequencePair> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      auto& p = out[i];
      p.drive.assign(drive.data.begin() + i * len, drive.data.begin() + (i + 1) * len);
      p.target.assign(target.data.begin() + i * len, target.data.begin() + (i + 1) * len);
      for (std::size_t s = 0; s < nsym; ++s) p.symbols.push_back(static_cast<int>(symbols.data[i * nsym + s]));
      for (std::size_t b = 0; b < nblk; ++b) {
        const double* r = &shapes.data[(i * nblk + b) * 3];
        p.shapes.push_back({r[0] != 0.0, r[1], r[2]});
      }
    }
    return out;
  };
  ds.train = unpack("train", io::field<std::size_t>(h, "n_train", "dataset"));
  ds.validation = unpack("validation", io::field<std::size_t>(h, "n_validation", "dataset"));
  return ds;
}

}  // namespace dmltwin::stim
