// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/laser/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dmltwin/errors.hpp"

namespace dmltwin::laser {

void MinMaxRecord::validate() const {
  if (!std::isfinite(min) || !std::isfinite(max) || !(max > min)) {
    std::ostringstream os;
    os << "min-max record has a degenerate range [" << min << ", " << max << "]";
    throw DomainError(os.str());
  }
}

MinMaxRecord min_max_of(std::span<const double> x) {
  if (x.empty()) throw DomainError("min-max of an empty waveform");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return {*lo, *hi};
}

std::vector<double> normalize(std::span<const double> x, const MinMaxRecord& rec) {
  rec.validate();
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [&](double v) { return rec.apply(v); });
  return out;
}

std::vector<double> denormalize(std::span<const double> y, const MinMaxRecord& rec) {
  rec.validate();
  std::vector<double> out(y.size());
  std::transform(y.begin(), y.end(), out.begin(), [&](double v) { return rec.invert(v); });
  return out;
}

NormalizedWaveform detect_and_normalize(std::span<const double> power) {
  const auto rec = min_max_of(power);
  if (!(rec.max > rec.min)) throw DomainError("detect_and_normalize: constant waveform has no range");
  return {normalize(power, rec), rec};
}

}  // namespace dmltwin::laser
