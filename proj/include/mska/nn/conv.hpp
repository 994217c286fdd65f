#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "mska/nn/common.hpp"
#include "mska/tensor.hpp"

namespace mska {

// State of one 1-D convolutional layer. Kernels are laid out
// (width, in_channels, out_channels) with out_channels contiguous so the
// innermost accumulation loop runs over a dense vector.
template <typename T>
struct ConvLayerState {
  Tensor<T> kernels;  // (W, IC, OC)
  Tensor<T> bias;     // (OC)
  int stride = 1;
  Padding padding = Padding::valid;

  Tensor<T> kernel_grad;  // same shape as kernels when present
  Tensor<T> bias_grad;

  std::size_t width() const { return kernels.extent(0); }
  std::size_t in_channels() const { return kernels.extent(1); }
  std::size_t out_channels() const { return kernels.extent(2); }

  static ConvLayerState make(std::size_t width, std::size_t in_channels,
                             std::size_t out_channels, int stride, Padding padding) {
    if (width < 1) throw std::invalid_argument("conv: kernel width must be >= 1");
    if (stride < 1) throw std::invalid_argument("conv: stride must be >= 1");
    ConvLayerState s;
    s.kernels = Tensor<T>({width, in_channels, out_channels});
    s.bias = Tensor<T>({out_channels});
    s.stride = stride;
    s.padding = padding;
    s.kernel_grad = Tensor<T>({width, in_channels, out_channels});
    s.bias_grad = Tensor<T>({out_channels});
    return s;
  }
};

namespace detail {

struct ConvGeometry {
  std::size_t out_length;
  long pad_left;  // zero for valid padding
};

inline ConvGeometry conv_geometry(std::size_t in_length, std::size_t width, int stride,
                                  Padding padding) {
  const auto s = static_cast<std::size_t>(stride);
  if (padding == Padding::valid) {
    if (in_length < width) {
      throw std::invalid_argument("conv: input length " + std::to_string(in_length) +
                                  " shorter than kernel width " + std::to_string(width) +
                                  " with valid padding");
    }
    return {(in_length - width) / s + 1, 0};
  }
  // same padding: output covers ceil(L / S); when the total pad is odd the
  // extra zero goes on the right.
  const std::size_t out = (in_length + s - 1) / s;
  const long total =
      std::max<long>(0, static_cast<long>((out - 1) * s + width) - static_cast<long>(in_length));
  return {out, total / 2};
}

}  // namespace detail

// Strided 1-D convolution: each output element is the dot product of one
// kernel with the local input window, plus that kernel's bias.
template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& input, const ConvLayerState<T>& layer) {
  require_finite(input, "conv1d_forward");
  const auto in = detail::as_blc(input.shape());
  const std::size_t W = layer.width();
  const std::size_t IC = layer.in_channels();
  const std::size_t OC = layer.out_channels();
  if (in.channels != IC) {
    throw std::invalid_argument("conv1d_forward: input has " + std::to_string(in.channels) +
                                " channels, kernels expect " + std::to_string(IC));
  }
  const auto geo = detail::conv_geometry(in.length, W, layer.stride, layer.padding);
  const std::size_t Lo = geo.out_length;
  const std::size_t L = in.length;

  Tensor<T> output(detail::signal_shape(in.rank, in.batch, Lo, OC));
  const T* x = input.data();
  const T* k = layer.kernels.data();
  const T* bias = layer.bias.data();
  T* y = output.data();

  for (std::size_t b = 0; b < in.batch; ++b) {
    const T* xb = x + b * L * IC;
    T* yb = y + b * Lo * OC;
    for (std::size_t i = 0; i < Lo; ++i) {
      T* acc = yb + i * OC;
      for (std::size_t oc = 0; oc < OC; ++oc) acc[oc] = bias[oc];
      const long base = static_cast<long>(i) * layer.stride - geo.pad_left;
      for (std::size_t w = 0; w < W; ++w) {
        const long l = base + static_cast<long>(w);
        if (l < 0 || l >= static_cast<long>(L)) continue;
        const T* xl = xb + static_cast<std::size_t>(l) * IC;
        const T* kw = k + w * IC * OC;
        for (std::size_t ic = 0; ic < IC; ++ic) {
          const T a = xl[ic];
          const T* kv = kw + ic * OC;
          for (std::size_t oc = 0; oc < OC; ++oc) acc[oc] += a * kv[oc];
        }
      }
    }
  }
  return output;
}

template <typename T>
struct ConvGrads {
  Tensor<T> input_grad;
  Tensor<T> kernel_grad;
  Tensor<T> bias_grad;
};

// Adjoint of conv1d_forward for the scalar loss sum(upstream_grad * output).
template <typename T>
ConvGrads<T> conv1d_backward(const Tensor<T>& input, const ConvLayerState<T>& layer,
                             const Tensor<T>& upstream_grad) {
  const auto in = detail::as_blc(input.shape());
  const std::size_t W = layer.width();
  const std::size_t IC = layer.in_channels();
  const std::size_t OC = layer.out_channels();
  if (in.channels != IC) {
    throw std::invalid_argument("conv1d_backward: input channel mismatch");
  }
  const auto geo = detail::conv_geometry(in.length, W, layer.stride, layer.padding);
  const std::size_t Lo = geo.out_length;
  const std::size_t L = in.length;
  const auto up = detail::as_blc(upstream_grad.shape());
  if (up.batch != in.batch || up.length != Lo || up.channels != OC) {
    throw std::invalid_argument("conv1d_backward: upstream shape " +
                                upstream_grad.shape_string() + " does not match output (" +
                                std::to_string(in.batch) + ", " + std::to_string(Lo) + ", " +
                                std::to_string(OC) + ")");
  }

  ConvGrads<T> g;
  g.input_grad = Tensor<T>(input.shape());
  g.kernel_grad = Tensor<T>({W, IC, OC});
  g.bias_grad = Tensor<T>({OC});

  const T* x = input.data();
  const T* u = upstream_grad.data();
  const T* k = layer.kernels.data();
  T* gx = g.input_grad.data();
  T* gk = g.kernel_grad.data();
  T* gb = g.bias_grad.data();

  for (std::size_t b = 0; b < in.batch; ++b) {
    const T* xb = x + b * L * IC;
    const T* ub = u + b * Lo * OC;
    T* gxb = gx + b * L * IC;
    for (std::size_t i = 0; i < Lo; ++i) {
      const T* ui = ub + i * OC;
      for (std::size_t oc = 0; oc < OC; ++oc) gb[oc] += ui[oc];
      const long base = static_cast<long>(i) * layer.stride - geo.pad_left;
      for (std::size_t w = 0; w < W; ++w) {
        const long l = base + static_cast<long>(w);
        if (l < 0 || l >= static_cast<long>(L)) continue;
        const T* xl = xb + static_cast<std::size_t>(l) * IC;
        T* gxl = gxb + static_cast<std::size_t>(l) * IC;
        const T* kw = k + w * IC * OC;
        T* gkw = gk + w * IC * OC;
        for (std::size_t ic = 0; ic < IC; ++ic) {
          const T a = xl[ic];
          const T* kv = kw + ic * OC;
          T* gkv = gkw + ic * OC;
          T sum = 0;
          for (std::size_t oc = 0; oc < OC; ++oc) {
            const T uo = ui[oc];
            gkv[oc] += a * uo;
            sum += kv[oc] * uo;
          }
          gxl[ic] += sum;
        }
      }
    }
  }
  return g;
}

}  // namespace mska
