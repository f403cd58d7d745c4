// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Eye-diagram histograms, rail statistics and image export.

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dmltwin/errors.hpp"
#include "dmltwin/eval/eval.hpp"
#include "dmltwin/io/container.hpp"
#include "dmltwin/stimulus/filter.hpp"
#include "dmltwin/stimulus/pulses.hpp"

namespace dmltwin::eval {

std::uint64_t EyeDiagram::total() const {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

EyeDiagram eye_diagram(std::span<const double> waveform, int sps, const EyeSpec& spec) {
  if (sps <= 0 || spec.time_bins <= 0 || spec.amp_bins <= 0 || spec.window_symbols <= 0) {
    throw ParameterError("eye_diagram: bins, window and sps must be positive");
  }
  if (waveform.size() < static_cast<std::size_t>(4 * sps)) {
    throw ParameterError("eye_diagram: waveform shorter than four symbol periods");
  }
  EyeDiagram eye;
  eye.time_bins = spec.time_bins;
  eye.amp_bins = spec.amp_bins;
  eye.sps = sps;
  const auto [lo, hi] = std::minmax_element(waveform.begin(), waveform.end());
  eye.amp_min = *lo;
  eye.amp_max = *hi;
  eye.counts.assign(static_cast<std::size_t>(spec.time_bins) * static_cast<std::size_t>(spec.amp_bins), 0);
  const std::size_t period = static_cast<std::size_t>(spec.window_symbols) * static_cast<std::size_t>(sps);
  const double span = eye.amp_max - eye.amp_min;
  for (std::size_t t = 0; t < waveform.size(); ++t) {
    const auto tb = (t % period) * static_cast<std::size_t>(spec.time_bins) / period;
    std::size_t ab = 0;
    if (span > 0.0) {
      ab = static_cast<std::size_t>((waveform[t] - eye.amp_min) / span * spec.amp_bins);
      ab = std::min(ab, static_cast<std::size_t>(spec.amp_bins - 1));
    }
    ++eye.counts[ab * static_cast<std::size_t>(spec.time_bins) + tb];
  }
  return eye;
}

double rail_separation_ratio(const EyeDiagram& eye, int rails) {
  if (rails < 2) throw ParameterError("rail_separation_ratio: need at least two rails");
  const double width = (eye.amp_max - eye.amp_min) / eye.amp_bins;
  if (!(width > 0.0)) return 0.0;
  double best = 0.0;
  for (int col = 0; col < eye.time_bins; ++col) {
    std::vector<double> amp, w;
    for (int a = 0; a < eye.amp_bins; ++a) {
      if (const auto c = eye.at(a, col)) {
        amp.push_back(eye.amp_min + (a + 0.5) * width);
        w.push_back(static_cast<double>(c));
      }
    }
    if (amp.size() < static_cast<std::size_t>(rails)) continue;
    double n = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i) {
      n += w[i];
      mean += w[i] * amp[i];
    }
    mean /= n;
    // Start the centres at evenly spaced weighted quantiles.
    std::vector<double> centre(static_cast<std::size_t>(rails));
    {
      double acc = 0.0;
      int k = 0;
      for (std::size_t i = 0; i < amp.size() && k < rails; ++i) {
        acc += w[i];
        while (k < rails && acc >= (k + 0.5) / rails * n) centre[static_cast<std::size_t>(k++)] = amp[i];
      }
    }
    std::vector<int> label(amp.size(), 0);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < amp.size(); ++i) {
        int arg = 0;
        for (int k = 1; k < rails; ++k) {
          if (std::abs(amp[i] - centre[static_cast<std::size_t>(k)]) <
              std::abs(amp[i] - centre[static_cast<std::size_t>(arg)])) {
            arg = k;
          }
        }
        changed |= arg != label[i];
        label[i] = arg;
      }
      std::vector<double> sw(static_cast<std::size_t>(rails), 0.0), sa(static_cast<std::size_t>(rails), 0.0);
      for (std::size_t i = 0; i < amp.size(); ++i) {
        sw[static_cast<std::size_t>(label[i])] += w[i];
        sa[static_cast<std::size_t>(label[i])] += w[i] * amp[i];
      }
      for (std::size_t k = 0; k < centre.size(); ++k) {
        if (sw[k] > 0.0) centre[k] = sa[k] / sw[k];
      }
      if (!changed && iter > 0) break;
    }
    double between = 0.0, within = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i) {
      const double c = centre[static_cast<std::size_t>(label[i])];
      between += w[i] * (c - mean) * (c - mean);
      within += w[i] * (amp[i] - c) * (amp[i] - c);
    }
    // A bin's own quantisation spread keeps the ratio finite for ideal rails.
    within = std::max(within, n * width * width / 12.0);
    best = std::max(best, between / within);
  }
  return best;
}

void write_eye_pgm(const std::filesystem::path& path, const EyeDiagram& eye) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  out << "P5\n" << eye.time_bins << ' ' << eye.amp_bins << "\n255\n";
  const double peak = std::log1p(static_cast<double>(*std::max_element(eye.counts.begin(), eye.counts.end())));
  for (int a = eye.amp_bins - 1; a >= 0; --a) {
    for (int t = 0; t < eye.time_bins; ++t) {
      const double v = peak > 0.0 ? std::log1p(static_cast<double>(eye.at(a, t))) / peak : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
  if (!out) throw FileError("short write to " + path.string());
}

void write_eye_histogram(const std::filesystem::path& path, const EyeDiagram& eye, const nlohmann::json& meta) {
  io::Container c;
  c.header = meta.is_object() ? meta : nlohmann::json::object();
  c.header["kind"] = "eye_histogram";
  c.header["time_bins"] = eye.time_bins;
  c.header["amp_bins"] = eye.amp_bins;
  c.header["sps"] = eye.sps;
  c.header["amp_min"] = eye.amp_min;
  c.header["amp_max"] = eye.amp_max;
  io::NamedArray counts{"counts", {static_cast<std::size_t>(eye.amp_bins), static_cast<std::size_t>(eye.time_bins)}, {}};
  counts.data.assign(eye.counts.begin(), eye.counts.end());
  c.arrays.push_back(std::move(counts));
  io::write_container(path, c);
}

std::vector<double> gaussian_4pam_drive(std::size_t n_symbols, int sps, double lpf_cutoff, std::mt19937_64& rng) {
  if (n_symbols == 0 || sps <= 0) throw ParameterError("gaussian_4pam_drive: empty stream");
  // Symbol period set to 1; the filter sees only the cutoff-to-rate ratio.
  const auto pulse = stim::supergaussian_pulse(0.5, 1.0, 1.0, sps);
  std::uniform_int_distribution<int> pam(0, 3);
  std::vector<double> raw;
  raw.reserve(n_symbols * static_cast<std::size_t>(sps));
  for (std::size_t s = 0; s < n_symbols; ++s) {
    const double level = stim::kPamLevels[pam(rng)];
    for (double v : pulse) raw.push_back(level * v);
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double lo_v = *lo, range = *hi - *lo;
  for (auto& v : raw) v = range > 0.0 ? (v - lo_v) / range : 0.0;
  return stim::lowpass_filter(raw, lpf_cutoff, static_cast<double>(sps));
}

}  // namespace dmltwin::eval
