// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-file container: uint64 little-endian header length, a JSON header,
// then raw little-endian float64 arrays in the order the header lists them.
// The header carries a SHA-256 over its own canonical form and the payload.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dmltwin::io {

struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

struct Container {
  nlohmann::json header;  // user metadata; reserved keys: arrays, content_sha256
  std::vector<NamedArray> arrays;

  const NamedArray& array(const std::string& name) const;  // FileError if absent
};

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(const std::string& text);

/// Hash of the header (without content_sha256) and every array's shape and bytes.
std::string content_hash(const Container& c);

void write_container(const std::filesystem::path& path, const Container& c);
/// Throws FileError on I/O failure, malformed layout or hash mismatch.
Container read_container(const std::filesystem::path& path);

/// Text helpers shared by the CSV writers.
void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace dmltwin::io
