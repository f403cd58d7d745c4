// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON (de)serialisation of every configuration record. Readers are strict:
// a missing or mistyped field is a FileError naming its path.

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dmltwin/errors.hpp"
#include "dmltwin/laser/normalize.hpp"
#include "dmltwin/laser/rate_equations.hpp"
#include "dmltwin/laser/simulate.hpp"
#include "dmltwin/stimulus/dataset.hpp"

namespace dmltwin::io {

using nlohmann::json;

json to_json(const laser::LaserParams& p);
json to_json(const laser::BiasMap& b);
json to_json(const laser::SolverConfig& s);
json to_json(const laser::MinMaxRecord& r);
json to_json(const stim::StimulusSpec& s);
json to_json(const stim::LinkConfig& l);

laser::LaserParams laser_from_json(const json& j, const std::string& where = "laser");
laser::BiasMap bias_from_json(const json& j, const std::string& where = "bias");
laser::SolverConfig solver_from_json(const json& j, const std::string& where = "solver");
laser::MinMaxRecord record_from_json(const json& j, const std::string& where = "record");
stim::StimulusSpec stimulus_from_json(const json& j, const std::string& where = "stimulus");
stim::LinkConfig link_from_json(const json& j, const std::string& where = "link");

/// Fetches j[key] as T or throws FileError("missing/invalid field '<where>.<key>'").
template <class T>
T field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FileError("missing config field '" + where + "." + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FileError("config field '" + where + "." + key + "' has the wrong type");
  }
}

/// SHA-256 of the canonical (sorted-key, compact) dump.
std::string config_hash(const json& j);

}  // namespace dmltwin::io
