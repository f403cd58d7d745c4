// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dynamic reverse-mode tape. Operations append an entry while the forward pass
// runs; backward() replays the entries in reverse topological order. A tape is
// rebuilt for every forward pass and is confined to one thread.

#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "dmltwin/autodiff/tensor.hpp"

namespace dmltwin::ad {

class Tape {
 public:
  /// Reads the output gradient and accumulates into the inputs that require one.
  using BackwardFn = std::function<void()>;

  struct Entry {
    std::string_view op;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  Tape() = default;
  /// A tape that never records; ops run forward only and outputs carry no grad.
  static Tape no_grad();

  bool recording() const noexcept { return recording_; }

  /// True when an op on these inputs must be recorded.
  bool tracks(std::initializer_list<const Tensor*> inputs) const;

  void record(std::string_view op, std::vector<Tensor> inputs, Tensor output, BackwardFn fn);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  bool recording_ = true;
  std::vector<Entry> entries_;
};

enum class BackwardOrder {
  reverse_recorded,  // reverse of the recording order
  depth_first,       // reverse post-order of a DFS from the loss
};

/// Seeds d(loss)/d(loss) = 1 and populates grad on every reachable tensor that
/// requires one. Gradients accumulate, so parameters shared across several
/// tapes collect the sum.
void backward(Tensor& loss, const Tape& tape, BackwardOrder order = BackwardOrder::reverse_recorded);

}  // namespace dmltwin::ad
