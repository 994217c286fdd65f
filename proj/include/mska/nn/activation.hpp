#pragma once

#include <cmath>

#include "mska/nn/common.hpp"
#include "mska/tensor.hpp"

namespace mska {

namespace detail {

template <typename T>
inline T sigmoid_scalar(T v) {
  // Split on sign so the exp argument is never positive.
  if (v >= 0) return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

}  // namespace detail

// Elementwise nonlinearity; linear is the identity.
template <typename T>
Tensor<T> activation_forward(const Tensor<T>& input, Activation kind) {
  Tensor<T> out(input.shape());
  const T* x = input.data();
  T* y = out.data();
  const std::size_t n = input.size();
  switch (kind) {
    case Activation::linear:
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i];
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) y[i] = detail::sigmoid_scalar(x[i]);
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
      break;
  }
  return out;
}

// Multiplies upstream by the elementwise derivative at the pre-activation
// input. The ReLU derivative at exactly 0 is taken as 0.
template <typename T>
Tensor<T> activation_backward(const Tensor<T>& input, Activation kind,
                              const Tensor<T>& upstream_grad) {
  if (!input.same_shape(upstream_grad)) {
    throw std::invalid_argument("activation_backward: upstream shape " +
                                upstream_grad.shape_string() + " does not match input " +
                                input.shape_string());
  }
  Tensor<T> out(input.shape());
  const T* x = input.data();
  const T* u = upstream_grad.data();
  T* g = out.data();
  const std::size_t n = input.size();
  switch (kind) {
    case Activation::linear:
      for (std::size_t i = 0; i < n; ++i) g[i] = u[i];
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < n; ++i) g[i] = x[i] > T(0) ? u[i] : T(0);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const T s = detail::sigmoid_scalar(x[i]);
        g[i] = u[i] * s * (T(1) - s);
      }
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < n; ++i) {
        const T t = std::tanh(x[i]);
        g[i] = u[i] * (T(1) - t * t);
      }
      break;
  }
  return out;
}

}  // namespace mska
