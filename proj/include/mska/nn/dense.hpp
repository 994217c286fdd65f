#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "mska/tensor.hpp"

namespace mska {

// Fully connected layer, weights (in, out) so the output loop vectorizes.
template <typename T>
struct DenseLayerState {
  Tensor<T> weights;  // (in, out)
  Tensor<T> bias;     // (out)

  Tensor<T> weight_grad;
  Tensor<T> bias_grad;

  std::size_t in_size() const { return weights.extent(0); }
  std::size_t out_size() const { return weights.extent(1); }

  static DenseLayerState make(std::size_t in, std::size_t out) {
    DenseLayerState s;
    s.weights = Tensor<T>({in, out});
    s.bias = Tensor<T>({out});
    s.weight_grad = Tensor<T>({in, out});
    s.bias_grad = Tensor<T>({out});
    return s;
  }
};

namespace detail {

template <typename T>
inline std::pair<std::size_t, int> dense_batch(const Tensor<T>& x, std::size_t in_size,
                                               const char* what) {
  if (x.rank() == 1) {
    if (x.extent(0) != in_size)
      throw std::invalid_argument(std::string(what) + ": input width " +
                                  std::to_string(x.extent(0)) + " != layer in-size " +
                                  std::to_string(in_size));
    return {1, 1};
  }
  if (x.rank() == 2) {
    if (x.extent(1) != in_size)
      throw std::invalid_argument(std::string(what) + ": input width " +
                                  std::to_string(x.extent(1)) + " != layer in-size " +
                                  std::to_string(in_size));
    return {x.extent(0), 2};
  }
  throw std::invalid_argument(std::string(what) + ": expected rank 1-2 input, got " +
                              x.shape_string());
}

}  // namespace detail

// z = x W + b, batched over rows.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const DenseLayerState<T>& layer) {
  const auto [batch, rank] = detail::dense_batch(input, layer.in_size(), "dense_forward");
  const std::size_t in = layer.in_size(), out = layer.out_size();
  Tensor<T> output(rank == 1 ? std::vector<std::size_t>{out}
                             : std::vector<std::size_t>{batch, out});
  const T* x = input.data();
  const T* w = layer.weights.data();
  const T* b = layer.bias.data();
  T* y = output.data();
  for (std::size_t r = 0; r < batch; ++r) {
    const T* xr = x + r * in;
    T* yr = y + r * out;
    for (std::size_t j = 0; j < out; ++j) yr[j] = b[j];
    for (std::size_t i = 0; i < in; ++i) {
      const T a = xr[i];
      const T* wr = w + i * out;
      for (std::size_t j = 0; j < out; ++j) yr[j] += a * wr[j];
    }
  }
  return output;
}

template <typename T>
struct DenseGrads {
  Tensor<T> input_grad;
  Tensor<T> weight_grad;
  Tensor<T> bias_grad;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const DenseLayerState<T>& layer,
                             const Tensor<T>& upstream_grad) {
  const auto [batch, rank] = detail::dense_batch(input, layer.in_size(), "dense_backward");
  const std::size_t in = layer.in_size(), out = layer.out_size();
  const std::size_t up_batch = upstream_grad.rank() == 1 ? 1 : upstream_grad.extent(0);
  const std::size_t up_width =
      upstream_grad.rank() == 1 ? upstream_grad.extent(0) : upstream_grad.extent(1);
  if (up_batch != batch || up_width != out) {
    throw std::invalid_argument("dense_backward: upstream shape " +
                                upstream_grad.shape_string() + " does not match output (" +
                                std::to_string(batch) + ", " + std::to_string(out) + ")");
  }

  DenseGrads<T> g;
  g.input_grad = Tensor<T>(input.shape());
  g.weight_grad = Tensor<T>({in, out});
  g.bias_grad = Tensor<T>({out});

  const T* x = input.data();
  const T* w = layer.weights.data();
  const T* u = upstream_grad.data();
  T* gx = g.input_grad.data();
  T* gw = g.weight_grad.data();
  T* gb = g.bias_grad.data();

  for (std::size_t r = 0; r < batch; ++r) {
    const T* xr = x + r * in;
    const T* ur = u + r * out;
    T* gxr = gx + r * in;
    for (std::size_t j = 0; j < out; ++j) gb[j] += ur[j];
    for (std::size_t i = 0; i < in; ++i) {
      const T a = xr[i];
      const T* wr = w + i * out;
      T* gwr = gw + i * out;
      T sum = 0;
      for (std::size_t j = 0; j < out; ++j) {
        gwr[j] += a * ur[j];
        sum += wr[j] * ur[j];
      }
      gxr[i] = sum;
    }
  }
  (void)rank;
  return g;
}

}  // namespace mska
