#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mska/tensor.hpp"

namespace mska {

enum class BatchNormMode { train, adapt_eval };

// Per-channel batch normalization over (batch, length, channels) input.
// Train mode normalizes with current-batch statistics and pushes the batch
// mean/variance into the running accumulators; adapt_eval normalizes with the
// accumulated averages without touching any state. Both frozen evaluation and
// AdBN are expressed through the accumulators: frozen uses the averages left
// by training, AdBN resets them and re-accumulates over the evaluation set.
template <typename T>
struct BatchNormState {
  Tensor<T> scale;   // alpha
  Tensor<T> offset;  // beta
  T epsilon = T(1e-5);

  Tensor<T> avg_mean;  // average of per-batch channel means
  Tensor<T> avg_var;   // average of per-batch channel variances (population)
  long batch_count = 0;

  Tensor<T> scale_grad;
  Tensor<T> offset_grad;

  std::size_t channels() const { return scale.size(); }

  // epsilon 0 is permitted for exactness checks on non-degenerate data; the
  // production default is 1e-5.
  static BatchNormState make(std::size_t channels, T epsilon = T(1e-5)) {
    if (!(epsilon >= T(0))) throw std::invalid_argument("batchnorm: epsilon must be >= 0");
    BatchNormState s;
    s.scale = Tensor<T>::full({channels}, T(1));
    s.offset = Tensor<T>({channels});
    s.epsilon = epsilon;
    s.avg_mean = Tensor<T>({channels});
    s.avg_var = Tensor<T>({channels});
    s.batch_count = 0;
    s.scale_grad = Tensor<T>({channels});
    s.offset_grad = Tensor<T>({channels});
    return s;
  }

  void reset_accumulators() {
    avg_mean.fill(T(0));
    avg_var.fill(T(0));
    batch_count = 0;
  }
};

namespace detail {

// Population mean/variance per channel over (batch x length), accumulated in
// double with a fixed traversal order.
template <typename T>
void batch_channel_stats(const Tensor<T>& x, std::vector<double>& mean,
                         std::vector<double>& var) {
  const std::size_t B = x.extent(0), L = x.extent(1), C = x.extent(2);
  const double n = static_cast<double>(B * L);
  mean.assign(C, 0.0);
  var.assign(C, 0.0);
  const T* p = x.data();
  for (std::size_t i = 0; i < B * L; ++i) {
    const T* row = p + i * C;
    for (std::size_t c = 0; c < C; ++c) mean[c] += static_cast<double>(row[c]);
  }
  for (std::size_t c = 0; c < C; ++c) mean[c] /= n;
  for (std::size_t i = 0; i < B * L; ++i) {
    const T* row = p + i * C;
    for (std::size_t c = 0; c < C; ++c) {
      const double d = static_cast<double>(row[c]) - mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < C; ++c) var[c] /= n;
}

template <typename T>
void check_batchnorm_input(const Tensor<T>& x, const BatchNormState<T>& state,
                           const char* what) {
  if (x.rank() != 3) {
    throw std::invalid_argument(std::string(what) + ": expected (batch, length, channels), got " +
                                x.shape_string());
  }
  if (x.extent(2) != state.channels()) {
    throw std::invalid_argument(std::string(what) + ": input has " + std::to_string(x.extent(2)) +
                                " channels, state has " + std::to_string(state.channels()));
  }
}

}  // namespace detail

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& input, BatchNormState<T>& state,
                            BatchNormMode mode) {
  detail::check_batchnorm_input(input, state, "batchnorm_forward");
  const std::size_t B = input.extent(0), L = input.extent(1), C = input.extent(2);

  std::vector<double> mean(C), var(C);
  if (mode == BatchNormMode::train) {
    if (B < 2) {
      throw std::invalid_argument("batchnorm_forward: train mode requires batch size >= 2, got " +
                                  std::to_string(B));
    }
    detail::batch_channel_stats(input, mean, var);
    state.batch_count += 1;
    const T inv_count = T(1) / static_cast<T>(state.batch_count);
    for (std::size_t c = 0; c < C; ++c) {
      state.avg_mean[c] += (static_cast<T>(mean[c]) - state.avg_mean[c]) * inv_count;
      state.avg_var[c] += (static_cast<T>(var[c]) - state.avg_var[c]) * inv_count;
    }
  } else {
    if (state.batch_count == 0) {
      throw std::runtime_error("batchnorm_forward: no adaptation statistics accumulated");
    }
    for (std::size_t c = 0; c < C; ++c) {
      mean[c] = static_cast<double>(state.avg_mean[c]);
      var[c] = static_cast<double>(state.avg_var[c]);
    }
  }

  Tensor<T> output(input.shape());
  std::vector<T> shift(C), gain(C);
  for (std::size_t c = 0; c < C; ++c) {
    const T inv_std = T(1) / static_cast<T>(std::sqrt(var[c] + static_cast<double>(state.epsilon)));
    gain[c] = state.scale[c] * inv_std;
    shift[c] = state.offset[c] - static_cast<T>(mean[c]) * gain[c];
  }
  const T* x = input.data();
  T* y = output.data();
  for (std::size_t i = 0; i < B * L; ++i) {
    const T* xr = x + i * C;
    T* yr = y + i * C;
    for (std::size_t c = 0; c < C; ++c) yr[c] = xr[c] * gain[c] + shift[c];
  }
  return output;
}

template <typename T>
struct BatchNormGrads {
  Tensor<T> input_grad;
  Tensor<T> scale_grad;
  Tensor<T> offset_grad;
};

// Adjoint of the train-mode forward, including the dependence of the batch
// mean/variance on every element of the batch.
template <typename T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& input, const BatchNormState<T>& state,
                                     const Tensor<T>& upstream_grad) {
  detail::check_batchnorm_input(input, state, "batchnorm_backward");
  if (!input.same_shape(upstream_grad)) {
    throw std::invalid_argument("batchnorm_backward: upstream shape " +
                                upstream_grad.shape_string() + " does not match input " +
                                input.shape_string());
  }
  const std::size_t B = input.extent(0), L = input.extent(1), C = input.extent(2);
  const std::size_t rows = B * L;
  const double n = static_cast<double>(rows);

  std::vector<double> mean(C), var(C);
  detail::batch_channel_stats(input, mean, var);

  std::vector<double> inv_std(C);
  for (std::size_t c = 0; c < C; ++c)
    inv_std[c] = 1.0 / std::sqrt(var[c] + static_cast<double>(state.epsilon));

  // sum_u[c] = sum of upstream, sum_ux[c] = sum of upstream * x_hat
  std::vector<double> sum_u(C, 0.0), sum_ux(C, 0.0);
  const T* x = input.data();
  const T* u = upstream_grad.data();
  for (std::size_t i = 0; i < rows; ++i) {
    const T* xr = x + i * C;
    const T* ur = u + i * C;
    for (std::size_t c = 0; c < C; ++c) {
      const double xh = (static_cast<double>(xr[c]) - mean[c]) * inv_std[c];
      sum_u[c] += static_cast<double>(ur[c]);
      sum_ux[c] += static_cast<double>(ur[c]) * xh;
    }
  }

  BatchNormGrads<T> g;
  g.input_grad = Tensor<T>(input.shape());
  g.scale_grad = Tensor<T>({C});
  g.offset_grad = Tensor<T>({C});
  for (std::size_t c = 0; c < C; ++c) {
    g.scale_grad[c] = static_cast<T>(sum_ux[c]);
    g.offset_grad[c] = static_cast<T>(sum_u[c]);
  }

  T* gx = g.input_grad.data();
  for (std::size_t i = 0; i < rows; ++i) {
    const T* xr = x + i * C;
    const T* ur = u + i * C;
    T* gr = gx + i * C;
    for (std::size_t c = 0; c < C; ++c) {
      const double xh = (static_cast<double>(xr[c]) - mean[c]) * inv_std[c];
      const double du = static_cast<double>(ur[c]);
      const double val = static_cast<double>(state.scale[c]) * inv_std[c] *
                         (du - sum_u[c] / n - xh * sum_ux[c] / n);
      gr[c] = static_cast<T>(val);
    }
  }
  return g;
}

}  // namespace mska
