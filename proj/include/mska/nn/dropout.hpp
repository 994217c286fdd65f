#pragma once

#include <stdexcept>

#include "mska/rng.hpp"
#include "mska/tensor.hpp"

namespace mska {

enum class DropoutMode { train, eval };

template <typename T>
struct DropoutResult {
  Tensor<T> output;
  Tensor<T> mask;  // 0 at dropped units, 1/(1-rate) at survivors
};

// Inverted dropout: survivors are scaled at train time so evaluation is a
// plain pass-through.
template <typename T>
DropoutResult<T> dropout_forward(const Tensor<T>& input, T rate, DropoutMode mode,
                                 SplitMix64* rng) {
  if (!(rate >= T(0) && rate < T(1))) {
    throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  }
  DropoutResult<T> r;
  if (mode == DropoutMode::eval || rate == T(0)) {
    r.output = input;
    r.mask = Tensor<T>::full(input.shape(), T(1));
    return r;
  }
  if (rng == nullptr) {
    throw std::invalid_argument("dropout: train mode requires a seeded random generator");
  }
  r.output = Tensor<T>(input.shape());
  r.mask = Tensor<T>(input.shape());
  const T keep_scale = T(1) / (T(1) - rate);
  const T* x = input.data();
  T* y = r.output.data();
  T* m = r.mask.data();
  const std::size_t n = input.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (rng->uniform() < static_cast<double>(rate)) {
      m[i] = T(0);
      y[i] = T(0);
    } else {
      m[i] = keep_scale;
      y[i] = x[i] * keep_scale;
    }
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& upstream_grad) {
  if (!mask.same_shape(upstream_grad)) {
    throw std::invalid_argument("dropout_backward: mask/upstream shape mismatch");
  }
  Tensor<T> g(mask.shape());
  const T* m = mask.data();
  const T* u = upstream_grad.data();
  T* out = g.data();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = m[i] * u[i];
  return g;
}

}  // namespace mska
