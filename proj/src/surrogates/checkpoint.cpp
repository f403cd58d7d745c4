// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/surrogates/checkpoint.hpp"

#include <cmath>

#include "dmltwin/errors.hpp"
#include "dmltwin/io/config.hpp"
#include "dmltwin/io/container.hpp"

namespace dmltwin::surrogate {

nlohmann::json hyper_to_json(const ModelHyper& h) {
  return {{"kind", to_string(h.kind)},       {"profile", to_string(h.profile)},  {"hidden_nodes", h.hidden_nodes},
          {"hidden_layers", h.hidden_layers}, {"mlp_sublayers", h.mlp_sublayers}, {"conv_window", h.conv_window},
          {"embed_dim", h.embed_dim},         {"n_heads", h.n_heads},             {"memory", h.memory},
          {"max_len", h.max_len}};
}

ModelHyper hyper_from_json(const nlohmann::json& j) {
  const std::string w = "hyper";
  ModelHyper h;
  h.kind = parse_model_kind(io::field<std::string>(j, "kind", w));
  h.profile = parse_profile(io::field<std::string>(j, "profile", w));
  h.hidden_nodes = io::field<int>(j, "hidden_nodes", w);
  h.hidden_layers = io::field<int>(j, "hidden_layers", w);
  h.mlp_sublayers = io::field<int>(j, "mlp_sublayers", w);
  h.conv_window = io::field<int>(j, "conv_window", w);
  h.embed_dim = io::field<int>(j, "embed_dim", w);
  h.n_heads = io::field<int>(j, "n_heads", w);
  h.memory = io::field<int>(j, "memory", w);
  h.max_len = io::field<int>(j, "max_len", w);
  h.validate();
  return h;
}

void save_checkpoint(const std::filesystem::path& path, const SurrogateModel& m, const CheckpointMeta& meta) {
  io::Container c;
  c.header = {{"kind", "checkpoint"},
              {"hyper", hyper_to_json(m.hyper)},
              {"seed", m.seed},
              {"train_config_hash", meta.train_config_hash},
              {"dataset_hash", meta.dataset_hash},
              {"rate_fraction", meta.rate_fraction},
              {"epoch", meta.epoch},
              {"val_nrmse", std::isfinite(meta.val_nrmse) ? nlohmann::json(meta.val_nrmse) : nlohmann::json()}};
  for (const auto& p : m.params) {
    const auto v = p.tensor.values();
    c.arrays.push_back({p.name, p.tensor.shape(), std::vector<double>(v.begin(), v.end())});
  }
  io::write_container(path, c);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const auto c = io::read_container(path);
  const auto& h = c.header;
  if (h.value("kind", "") != "checkpoint") throw FileError("'" + path.string() + "' is not a model checkpoint");
  LoadedCheckpoint out;
  const auto hyper = hyper_from_json(io::field<nlohmann::json>(h, "hyper", "checkpoint"));
  // Build the expected layout, then overwrite the values.
  out.model = init_model(hyper, io::field<std::uint64_t>(h, "seed", "checkpoint"));
  if (c.arrays.size() != out.model.params.size()) {
    throw FileError("'" + path.string() + "': parameter list does not match the model layout");
  }
  for (std::size_t i = 0; i < c.arrays.size(); ++i) {
    auto& p = out.model.params[i];
    const auto& a = c.arrays[i];
    if (a.name != p.name || a.shape != p.tensor.shape()) {
      throw FileError("'" + path.string() + "': parameter '" + a.name + "' does not match '" + p.name + "' " +
                      ad::shape_str(p.tensor.shape()));
    }
    std::copy(a.data.begin(), a.data.end(), p.tensor.values().begin());
  }
  out.meta.train_config_hash = io::field<std::string>(h, "train_config_hash", "checkpoint");
  out.meta.dataset_hash = io::field<std::string>(h, "dataset_hash", "checkpoint");
  out.meta.rate_fraction = io::field<double>(h, "rate_fraction", "checkpoint");
  out.meta.epoch = io::field<int>(h, "epoch", "checkpoint");
  out.meta.val_nrmse = h.at("val_nrmse").is_null() ? std::nan("") : h.at("val_nrmse").get<double>();
  return out;
}

}  // namespace dmltwin::surrogate
