// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0

#include "dmltwin/io/container.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "dmltwin/errors.hpp"

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace dmltwin::io {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw FileError("sha256: digest initialisation failed");
    }
  }
  void update(const void* data, std::size_t n) {
    if (n > 0 && EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw FileError("sha256: digest update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw FileError("sha256: digest finalisation failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

nlohmann::json full_header(const Container& c) {
  nlohmann::json h = c.header;
  h.erase("content_sha256");
  nlohmann::json arrays = nlohmann::json::array();
  for (const auto& a : c.arrays) arrays.push_back({{"name", a.name}, {"shape", a.shape}});
  h["arrays"] = std::move(arrays);
  return h;
}

std::size_t count_of(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

const NamedArray& Container::array(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw FileError("container has no array named '" + name + "'");
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

std::string content_hash(const Container& c) {
  Sha256 h;
  const std::string head = full_header(c).dump();
  h.update(head.data(), head.size());
  for (const auto& a : c.arrays) h.update(a.data.data(), a.data.size() * sizeof(double));
  return h.hex();
}

void write_container(const std::filesystem::path& path, const Container& c) {
  for (const auto& a : c.arrays) {
    if (count_of(a.shape) != a.data.size()) {
      throw DimensionError("container array '" + a.name + "' shape does not match its data length");
    }
  }
  nlohmann::json h = full_header(c);
  h["content_sha256"] = content_hash(c);
  const std::string head = h.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open '" + path.string() + "' for writing");
  const std::uint64_t len = head.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& a : c.arrays) {
    out.write(reinterpret_cast<const char*>(a.data.data()), static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  }
  if (!out) throw FileError("write to '" + path.string() + "' failed");
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path.string() + "'");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len == 0 || len > (1ull << 30)) throw FileError("'" + path.string() + "': malformed header length");
  std::string head(len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(len));
  if (!in) throw FileError("'" + path.string() + "': truncated header");

  Container c;
  try {
    c.header = nlohmann::json::parse(head);
  } catch (const nlohmann::json::exception& e) {
    throw FileError("'" + path.string() + "': header is not valid JSON (" + e.what() + ")");
  }
  if (!c.header.contains("arrays") || !c.header["arrays"].is_array()) {
    throw FileError("'" + path.string() + "': header lacks an arrays list");
  }
  for (const auto& spec : c.header["arrays"]) {
    NamedArray a;
    a.name = spec.at("name").get<std::string>();
    a.shape = spec.at("shape").get<std::vector<std::size_t>>();
    a.data.resize(count_of(a.shape));
    in.read(reinterpret_cast<char*>(a.data.data()), static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    if (!in) throw FileError("'" + path.string() + "': truncated payload in array '" + a.name + "'");
    c.arrays.push_back(std::move(a));
  }
  const std::string stored = c.header.value("content_sha256", "");
  c.header.erase("arrays");
  if (stored != content_hash(c)) throw FileError("'" + path.string() + "': content hash mismatch");
  c.header["content_sha256"] = stored;
  return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw FileError("write to '" + path.string() + "' failed");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FileError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace dmltwin::io
