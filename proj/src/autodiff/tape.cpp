// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/autodiff/tape.hpp"

#include <unordered_map>

#include "dmltwin/errors.hpp"

namespace dmltwin::ad {

Tape Tape::no_grad() {
  Tape t;
  t.recording_ = false;
  return t;
}

bool Tape::tracks(std::initializer_list<const Tensor*> inputs) const {
  if (!recording_) return false;
  for (const Tensor* t : inputs) {
    if (t && t->requires_grad()) return true;
  }
  return false;
}

void Tape::record(std::string_view op, std::vector<Tensor> inputs, Tensor output, BackwardFn fn) {
  output.set_requires_grad(true);
  entries_.push_back(Entry{op, std::move(inputs), std::move(output), std::move(fn)});
}

namespace {

std::vector<std::size_t> depth_first_order(const Tensor& loss, const Tape& tape) {
  const auto& entries = tape.entries();
  std::unordered_map<const void*, std::size_t> producer;
  for (std::size_t i = 0; i < entries.size(); ++i) producer[entries[i].output.id()] = i;

  // Iterative post-order DFS; post-order lists producers before consumers.
  std::vector<std::size_t> post;
  std::vector<char> state(entries.size(), 0);  // 0 new, 1 open, 2 done
  auto root = producer.find(loss.id());
  if (root == producer.end()) return post;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root->second, 0}};
  state[root->second] = 1;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto& inputs = entries[node].inputs;
    if (next < inputs.size()) {
      auto it = producer.find(inputs[next++].id());
      if (it != producer.end() && state[it->second] == 0) {
        state[it->second] = 1;
        stack.emplace_back(it->second, 0);
      }
    } else {
      state[node] = 2;
      post.push_back(node);
      stack.pop_back();
    }
  }
  return {post.rbegin(), post.rend()};
}

}  // namespace

void backward(Tensor& loss, const Tape& tape, BackwardOrder order) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got " + (loss.defined() ? shape_str(loss.shape()) : "undefined"));
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward(): loss does not depend on any tensor that requires grad");
  }
  loss.grad_buffer()[0] = 1.0;

  const auto& entries = tape.entries();
  auto run = [&](std::size_t i) {
    const auto& e = entries[i];
    if (e.output.has_grad()) e.backward();
  };
  if (order == BackwardOrder::reverse_recorded) {
    for (std::size_t i = entries.size(); i-- > 0;) run(i);
  } else {
    for (std::size_t i : depth_first_order(loss, tape)) run(i);
  }
}

}  // namespace dmltwin::ad
