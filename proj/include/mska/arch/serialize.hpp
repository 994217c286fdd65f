#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mska/arch/network.hpp"
#include "mska/arch/spec.hpp"

namespace mska {

// Model file layout, all integers little-endian:
//   bytes 0-7   magic "MSKAMDL\0"
//   byte  8     format version (1)
//   u32         length of the UTF-8 JSON architecture descriptor
//   ...         descriptor bytes
//   per parameterized layer, in descriptor order:
//     u32       blob byte length
//     ...       parameters as 32-bit little-endian reals
// Batch-norm blobs carry scale, offset, averaged mean/variance and the batch
// counter, so frozen-statistics inference survives a round trip.

inline constexpr char kModelMagic[8] = {'M', 'S', 'K', 'A', 'M', 'D', 'L', '\0'};
inline constexpr std::uint8_t kModelVersion = 1;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

inline std::uint32_t get_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

inline float get_f32(const std::vector<std::uint8_t>& b, std::size_t at) {
  const std::uint32_t bits = get_u32(b, at);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace detail

template <typename T>
std::vector<std::uint8_t> serialize_model(const Model<T>& model) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kModelMagic, kModelMagic + 8);
  out.push_back(kModelVersion);
  const std::string descriptor = architecture_to_json(model.architecture()).dump();
  detail::put_u32(out, static_cast<std::uint32_t>(descriptor.size()));
  out.insert(out.end(), descriptor.begin(), descriptor.end());
  for (std::size_t i = 0; i < model.architecture().layers.size(); ++i) {
    const std::vector<float> values = model.export_layer_values(i);
    if (values.empty()) continue;
    detail::put_u32(out, static_cast<std::uint32_t>(values.size() * 4));
    for (float v : values) detail::put_f32(out, v);
  }
  return out;
}

template <typename T = float>
Model<T> deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 13 || std::memcmp(bytes.data(), kModelMagic, 8) != 0) {
    throw std::runtime_error("not a model file (bad magic)");
  }
  if (bytes[8] != kModelVersion) {
    throw std::runtime_error("unsupported model file version " + std::to_string(bytes[8]));
  }
  std::size_t pos = 9;
  const std::uint32_t desc_len = detail::get_u32(bytes, pos);
  pos += 4;
  if (pos + desc_len > bytes.size()) {
    throw std::runtime_error("model file truncated inside architecture descriptor");
  }
  const std::string descriptor(bytes.begin() + static_cast<long>(pos),
                               bytes.begin() + static_cast<long>(pos + desc_len));
  pos += desc_len;

  ArchitectureSpec arch = architecture_from_json(nlohmann::json::parse(descriptor));
  Model<T> model(arch, /*seed=*/0);

  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const std::size_t expected = model.layer_value_count(i);
    if (expected == 0) continue;
    if (pos + 4 > bytes.size()) {
      throw std::runtime_error("model file truncated before blob of layer " + std::to_string(i) +
                               " (" + to_string(arch.layers[i].kind) + ")");
    }
    const std::uint32_t blob_len = detail::get_u32(bytes, pos);
    pos += 4;
    if (blob_len != expected * 4) {
      throw std::runtime_error("layer " + std::to_string(i) + " (" +
                               to_string(arch.layers[i].kind) + "): blob length " +
                               std::to_string(blob_len) + " bytes, descriptor expects " +
                               std::to_string(expected * 4));
    }
    if (pos + blob_len > bytes.size()) {
      throw std::runtime_error("model file truncated inside blob of layer " + std::to_string(i) +
                               " (" + to_string(arch.layers[i].kind) + ")");
    }
    std::vector<float> values(expected);
    for (std::size_t k = 0; k < expected; ++k) values[k] = detail::get_f32(bytes, pos + k * 4);
    pos += blob_len;
    model.import_layer_values(i, values);
  }
  if (pos != bytes.size()) {
    throw std::runtime_error("model file has " + std::to_string(bytes.size() - pos) +
                             " trailing bytes");
  }
  return model;
}

template <typename T>
void save_model(const Model<T>& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open model file for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

template <typename T = float>
Model<T> load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open model file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model<T>(bytes);
}

}  // namespace mska
