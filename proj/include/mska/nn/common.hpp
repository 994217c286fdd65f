#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mska/tensor.hpp"

namespace mska {

enum class Activation { linear, relu, sigmoid, tanh };
enum class Padding { valid, same };
enum class PoolKind { max, mean };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::linear;
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation: " + s);
}

namespace detail {

// Normalized (batch, length, channels) view of a rank 1-3 signal tensor.
// rank 1 = (length), rank 2 = (length, channels), rank 3 = (batch, length, channels).
struct Blc {
  std::size_t batch;
  std::size_t length;
  std::size_t channels;
  int rank;
};

inline Blc as_blc(const std::vector<std::size_t>& shape) {
  switch (shape.size()) {
    case 1: return {1, shape[0], 1, 1};
    case 2: return {1, shape[0], shape[1], 2};
    case 3: return {shape[0], shape[1], shape[2], 3};
    default: throw std::invalid_argument("signal tensor must have rank 1-3");
  }
}

// Shape of a per-position result, keeping the input's rank convention.
// A rank-1 input promotes to rank 2 when more than one output channel exists.
inline std::vector<std::size_t> signal_shape(int input_rank, std::size_t batch,
                                             std::size_t length, std::size_t channels) {
  if (input_rank == 3) return {batch, length, channels};
  if (input_rank == 2 || channels > 1) return {length, channels};
  return {length};
}

}  // namespace detail
}  // namespace mska
