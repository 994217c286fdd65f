#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "mska/nn/common.hpp"
#include "mska/tensor.hpp"

namespace mska {

namespace detail {

inline std::size_t pool_out_length(std::size_t in_length, int width, int stride) {
  if (width < 1 || stride < 1) throw std::invalid_argument("pool1d: width and stride must be >= 1");
  if (static_cast<std::size_t>(width) > in_length) {
    throw std::invalid_argument("pool1d: window width " + std::to_string(width) +
                                " exceeds input length " + std::to_string(in_length));
  }
  return (in_length - static_cast<std::size_t>(width)) / static_cast<std::size_t>(stride) + 1;
}

}  // namespace detail

// Per-channel windowed max or mean, no padding.
template <typename T>
Tensor<T> pool1d_forward(const Tensor<T>& input, int width, int stride, PoolKind kind) {
  const auto in = detail::as_blc(input.shape());
  const std::size_t Lo = detail::pool_out_length(in.length, width, stride);
  const std::size_t C = in.channels;
  Tensor<T> output(detail::signal_shape(in.rank, in.batch, Lo, C));
  const T* x = input.data();
  T* y = output.data();

  for (std::size_t b = 0; b < in.batch; ++b) {
    const T* xb = x + b * in.length * C;
    T* yb = y + b * Lo * C;
    for (std::size_t i = 0; i < Lo; ++i) {
      const T* win = xb + i * static_cast<std::size_t>(stride) * C;
      T* out = yb + i * C;
      if (kind == PoolKind::max) {
        for (std::size_t c = 0; c < C; ++c) out[c] = win[c];
        for (int w = 1; w < width; ++w) {
          const T* row = win + static_cast<std::size_t>(w) * C;
          for (std::size_t c = 0; c < C; ++c)
            if (row[c] > out[c]) out[c] = row[c];
        }
      } else {
        for (std::size_t c = 0; c < C; ++c) out[c] = win[c];
        for (int w = 1; w < width; ++w) {
          const T* row = win + static_cast<std::size_t>(w) * C;
          for (std::size_t c = 0; c < C; ++c) out[c] += row[c];
        }
        const T inv = T(1) / static_cast<T>(width);
        for (std::size_t c = 0; c < C; ++c) out[c] *= inv;
      }
    }
  }
  return output;
}

// Max routes each window's upstream gradient to the first position attaining
// the window max; mean distributes it uniformly.
template <typename T>
Tensor<T> pool1d_backward(const Tensor<T>& input, int width, int stride, PoolKind kind,
                          const Tensor<T>& upstream_grad) {
  const auto in = detail::as_blc(input.shape());
  const std::size_t Lo = detail::pool_out_length(in.length, width, stride);
  const std::size_t C = in.channels;
  const auto up = detail::as_blc(upstream_grad.shape());
  if (up.batch != in.batch || up.length != Lo || up.channels != C) {
    throw std::invalid_argument("pool1d_backward: upstream shape " +
                                upstream_grad.shape_string() + " does not match pooled output");
  }

  Tensor<T> grad(input.shape());
  const T* x = input.data();
  const T* u = upstream_grad.data();
  T* g = grad.data();

  for (std::size_t b = 0; b < in.batch; ++b) {
    const T* xb = x + b * in.length * C;
    const T* ub = u + b * Lo * C;
    T* gb = g + b * in.length * C;
    for (std::size_t i = 0; i < Lo; ++i) {
      const std::size_t start = i * static_cast<std::size_t>(stride);
      const T* ui = ub + i * C;
      if (kind == PoolKind::max) {
        for (std::size_t c = 0; c < C; ++c) {
          std::size_t arg = start;
          T best = xb[start * C + c];
          for (int w = 1; w < width; ++w) {
            const T v = xb[(start + static_cast<std::size_t>(w)) * C + c];
            if (v > best) {
              best = v;
              arg = start + static_cast<std::size_t>(w);
            }
          }
          gb[arg * C + c] += ui[c];
        }
      } else {
        const T inv = T(1) / static_cast<T>(width);
        for (int w = 0; w < width; ++w) {
          T* row = gb + (start + static_cast<std::size_t>(w)) * C;
          for (std::size_t c = 0; c < C; ++c) row[c] += ui[c] * inv;
        }
      }
    }
  }
  return grad;
}

}  // namespace mska
