// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/surrogates/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dmltwin/errors.hpp"
#include "dmltwin/rng.hpp"

namespace dmltwin::surrogate {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::volterra: return "volterra";
    case ModelKind::tdnn: return "tdnn";
    case ModelKind::lstm: return "lstm";
    case ModelKind::cat: return "cat";
  }
  return "?";
}

std::string to_string(Profile p) { return p == Profile::paper ? "paper" : "desk"; }

ModelKind parse_model_kind(const std::string& s) {
  for (auto k : {ModelKind::volterra, ModelKind::tdnn, ModelKind::lstm, ModelKind::cat}) {
    if (to_string(k) == s) return k;
  }
  throw ParameterError("unknown model kind '" + s + "' (expected volterra, tdnn, lstm or cat)");
}

Profile parse_profile(const std::string& s) {
  if (s == "paper") return Profile::paper;
  if (s == "desk") return Profile::desk;
  throw ParameterError("unknown scale profile '" + s + "' (expected paper or desk)");
}

ModelHyper ModelHyper::make(ModelKind kind, Profile profile) {
  const bool paper = profile == Profile::paper;
  ModelHyper h;
  h.kind = kind;
  h.profile = profile;
  switch (kind) {
    case ModelKind::volterra:
      h.memory = 16;
      break;
    case ModelKind::tdnn:
      h.hidden_nodes = paper ? 2048 : 256;
      h.hidden_layers = 1;
      h.conv_window = 31;
      break;
    case ModelKind::lstm:
      h.hidden_nodes = paper ? 64 : 32;
      h.hidden_layers = 2;
      break;
    case ModelKind::cat:
      h.hidden_nodes = paper ? 128 : 64;
      h.hidden_layers = 2;
      h.mlp_sublayers = 2;
      h.conv_window = 9;
      h.embed_dim = paper ? 128 : 32;
      h.n_heads = paper ? 8 : 2;
      break;
  }
  return h;
}

void ModelHyper::validate() const {
  auto fail = [&](const std::string& what) { throw ParameterError(to_string(kind) + " hyperparameters: " + what); };
  switch (kind) {
    case ModelKind::volterra:
      if (memory < 1) fail("memory must be >= 1");
      break;
    case ModelKind::tdnn:
      if (hidden_nodes < 1) fail("hidden_nodes must be >= 1");
      if (hidden_layers != 1) fail("hidden_layers must be 1");
      if (conv_window < 1) fail("conv_window must be >= 1");
      break;
    case ModelKind::lstm:
      if (hidden_nodes < 1) fail("hidden_nodes must be >= 1");
      if (hidden_layers < 1) fail("hidden_layers must be >= 1");
      break;
    case ModelKind::cat:
      if (embed_dim < 1 || n_heads < 1) fail("embed_dim and n_heads must be >= 1");
      if (embed_dim % n_heads != 0) fail("embed_dim must be divisible by n_heads");
      if (hidden_nodes < 1) fail("hidden_nodes (MLP width) must be >= 1");
      if (hidden_layers < 1) fail("hidden_layers must be >= 1");
      if (mlp_sublayers != hidden_layers) fail("mlp_sublayers must equal hidden_layers (one MLP per decoder layer)");
      if (conv_window < 1) fail("conv_window must be >= 1");
      if (max_len < 1) fail("max_len must be >= 1");
      break;
  }
}

const ad::Tensor& SurrogateModel::param(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.tensor;
  }
  throw ContractError("model has no parameter '" + name + "'");
}

std::size_t SurrogateModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.size();
  return n;
}

SurrogateModel SurrogateModel::clone() const {
  SurrogateModel m{hyper, {}, seed};
  for (const auto& p : params) {
    auto t = p.tensor.clone();
    t.set_requires_grad(p.tensor.requires_grad());
    m.params.push_back({p.name, t});
  }
  return m;
}

void SurrogateModel::set_requires_grad(bool flag) {
  for (auto& p : params) p.tensor.set_requires_grad(flag);
}

void SurrogateModel::zero_grad() const {
  for (const auto& p : params) p.tensor.zero_grad();
}

std::size_t expected_parameter_count(const ModelHyper& h) {
  h.validate();
  const std::size_t H = h.hidden_nodes, E = h.embed_dim, K = h.conv_window, M = h.memory;
  switch (h.kind) {
    case ModelKind::volterra:
      return 1 + M + M * (M + 1) / 2;
    case ModelKind::tdnn:
      return K * H + H + H + 1;
    case ModelKind::lstm: {
      std::size_t n = 0;
      for (int l = 0; l < h.hidden_layers; ++l) {
        const std::size_t in = l == 0 ? 1 : H;
        n += in * 4 * H + H * 4 * H + 4 * H;
      }
      return n + H + 1;
    }
    case ModelKind::cat: {
      const std::size_t layer = 2 * E                // pre-attention norm
                                + 2 * (K * E * E + E)  // Q, K convolutions
                                + 2 * (E * E + E)      // V and output projections
                                + 2 * E                // pre-MLP norm
                                + (E * H + H) + (H * E + E);
      return (K * E + E) + static_cast<std::size_t>(h.max_len) * E + h.hidden_layers * layer + 2 * E + E + 1;
    }
  }
  return 0;
}

namespace {

class Initializer {
 public:
  Initializer(SurrogateModel& m, std::uint64_t seed) : m_(m), rng_(keyed_engine(seed, Stream::model_init)) {}

  void uniform(const std::string& name, ad::Shape shape, double fan_in) {
    const double a = std::sqrt(1.0 / fan_in);
    std::uniform_real_distribution<double> u(-a, a);
    ad::Tensor t(shape);
    for (auto& v : t.values()) v = u(rng_);
    add(name, t);
  }
  void constant(const std::string& name, ad::Shape shape, double value) {
    ad::Tensor t(shape);
    for (auto& v : t.values()) v = value;
    add(name, t);
  }
  void normal(const std::string& name, ad::Shape shape, double sd) {
    std::normal_distribution<double> g(0.0, sd);
    ad::Tensor t(shape);
    for (auto& v : t.values()) v = g(rng_);
    add(name, t);
  }
  void add(const std::string& name, ad::Tensor t) {
    t.set_requires_grad(true);
    m_.params.push_back({name, t});
  }

 private:
  SurrogateModel& m_;
  std::mt19937_64 rng_;
};

}  // namespace

SurrogateModel init_model(const ModelHyper& h, std::uint64_t seed) {
  h.validate();
  SurrogateModel m{h, {}, seed};
  Initializer init(m, seed);
  const std::size_t H = h.hidden_nodes, E = h.embed_dim, K = h.conv_window, M = h.memory;
  switch (h.kind) {
    case ModelKind::volterra: {
      init.add("h0", ad::Tensor::scalar(0.0));
      init.uniform("h1", {M, 1}, double(M));
      init.uniform("h2", {M * (M + 1) / 2, 1}, double(M * (M + 1) / 2));
      break;
    }
    case ModelKind::tdnn:
      init.uniform("w1", {K, H}, double(K));
      init.constant("b1", {H}, 0.0);
      init.uniform("w2", {H, 1}, double(H));
      init.constant("b2", {1}, 0.0);
      break;
    case ModelKind::lstm:
      for (int l = 0; l < h.hidden_layers; ++l) {
        const std::string p = "l" + std::to_string(l) + ".";
        const std::size_t in = l == 0 ? 1 : H;
        init.uniform(p + "w", {in, 4 * H}, double(H));
        init.uniform(p + "u", {H, 4 * H}, double(H));
        ad::Tensor b(ad::Shape{4 * H});
        for (std::size_t i = H; i < 2 * H; ++i) b.values()[i] = 1.0;  // gate order i, f, g, o
        init.add(p + "b", b);
      }
      init.uniform("head.w", {H, 1}, double(H));
      init.constant("head.b", {1}, 0.0);
      break;
    case ModelKind::cat:
      init.uniform("embed.w", {K, 1, E}, double(K));
      init.constant("embed.b", {E}, 0.0);
      init.normal("pos", {static_cast<std::size_t>(h.max_len), E}, 0.02);
      for (int l = 0; l < h.hidden_layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        init.constant(p + "ln1.g", {E}, 1.0);
        init.constant(p + "ln1.b", {E}, 0.0);
        init.uniform(p + "q.w", {K, E, E}, double(K * E));
        init.constant(p + "q.b", {E}, 0.0);
        init.uniform(p + "k.w", {K, E, E}, double(K * E));
        init.constant(p + "k.b", {E}, 0.0);
        init.uniform(p + "v.w", {E, E}, double(E));
        init.constant(p + "v.b", {E}, 0.0);
        init.uniform(p + "o.w", {E, E}, double(E));
        init.constant(p + "o.b", {E}, 0.0);
        init.constant(p + "ln2.g", {E}, 1.0);
        init.constant(p + "ln2.b", {E}, 0.0);
        init.uniform(p + "mlp1.w", {E, H}, double(E));
        init.constant(p + "mlp1.b", {H}, 0.0);
        init.uniform(p + "mlp2.w", {H, E}, double(H));
        init.constant(p + "mlp2.b", {E}, 0.0);
      }
      init.constant("final_ln.g", {E}, 1.0);
      init.constant("final_ln.b", {E}, 0.0);
      init.uniform("head.w", {E, 1}, double(E));
      init.constant("head.b", {1}, 0.0);
      break;
  }
  return m;
}

ad::Tensor forward(ad::Tape& tape, const SurrogateModel& m, const ad::Tensor& x_in) {
  ad::Tensor x = x_in;
  if (x.rank() == 1) x = ad::reshape(tape, x, {1, x.dim(0)});
  if (x.rank() != 2) throw DimensionError("surrogate input must be [B x T], got " + ad::shape_str(x.shape()));
  switch (m.hyper.kind) {
    case ModelKind::volterra: return volterra_forward(tape, m, x);
    case ModelKind::tdnn: return tdnn_forward(tape, m, x);
    case ModelKind::lstm: return lstm_forward(tape, m, x);
    case ModelKind::cat: return cat_forward(tape, m, x);
  }
  throw ContractError("unknown model kind");
}

std::vector<std::vector<double>> predict(const SurrogateModel& m, const std::vector<std::vector<double>>& xs,
                                         std::size_t batch) {
  std::vector<std::vector<double>> out;
  out.reserve(xs.size());
  if (xs.empty()) return out;
  const std::size_t T = xs[0].size();
  batch = std::max<std::size_t>(batch, 1);
  auto tape = ad::Tape::no_grad();
  for (std::size_t start = 0; start < xs.size(); start += batch) {
    const std::size_t b = std::min(batch, xs.size() - start);
    std::vector<double> flat;
    flat.reserve(b * T);
    for (std::size_t i = 0; i < b; ++i) {
      if (xs[start + i].size() != T) throw DimensionError("predict: sequences must share one length");
      flat.insert(flat.end(), xs[start + i].begin(), xs[start + i].end());
    }
    const auto y = forward(tape, m, ad::Tensor({b, T}, std::move(flat)));
    const auto v = y.values();
    for (std::size_t i = 0; i < b; ++i) out.emplace_back(v.begin() + i * T, v.begin() + (i + 1) * T);
  }
  return out;
}

}  // namespace dmltwin::surrogate
