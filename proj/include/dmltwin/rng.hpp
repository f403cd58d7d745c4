// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Keyed random streams: every consumer draws from an engine seeded by
// (seed, stream, index), so results do not depend on generation order.

#pragma once

#include <cstdint>
#include <random>

namespace dmltwin {

enum class Stream : std::uint32_t {
  train_sequence = 1,
  validation_sequence = 2,
  model_init = 3,
  shuffle = 4,
  equalizer_symbols = 5,
  equalizer_eval_symbols = 6,
  test_draws = 7,
};

inline std::mt19937_64 keyed_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace dmltwin
