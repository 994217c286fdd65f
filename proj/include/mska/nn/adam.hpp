#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mska/tensor.hpp"

namespace mska {

template <typename T>
struct AdamConfig {
  T learning_rate = T(1e-4);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);

  void validate() const {
    if (!(learning_rate > T(0))) throw std::invalid_argument("adam: learning rate must be > 0");
    if (!(beta1 > T(0) && beta1 < T(1))) throw std::invalid_argument("adam: beta1 must be in (0,1)");
    if (!(beta2 > T(0) && beta2 < T(1))) throw std::invalid_argument("adam: beta2 must be in (0,1)");
    if (!(epsilon > T(0) && epsilon < T(1e-3)))
      throw std::invalid_argument("adam: epsilon must be in (0, 1e-3)");
  }
};

// A named view of one trainable tensor and its gradient.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value = nullptr;
  const Tensor<T>* grad = nullptr;
};

template <typename T>
struct AdamState {
  AdamConfig<T> config;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
  long step_count = 0;

  explicit AdamState(AdamConfig<T> cfg = {}) : config(cfg) { config.validate(); }
};

// One Adam update with bias correction over a fixed parameter list. Moment
// buffers are created on the first call and must keep matching shapes after.
template <typename T>
void adam_step(std::vector<ParamRef<T>>& params, AdamState<T>& state) {
  if (state.first_moment.empty()) {
    state.first_moment.reserve(params.size());
    state.second_moment.reserve(params.size());
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.value->shape());
      state.second_moment.emplace_back(p.value->shape());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: parameter list size changed");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (!p.value->same_shape(*p.grad) || !p.value->same_shape(state.first_moment[i])) {
      throw std::invalid_argument("adam_step: shape mismatch for parameter '" + p.name + "'");
    }
    if (!p.grad->all_finite()) {
      throw std::runtime_error("adam_step: non-finite gradient for parameter '" + p.name + "'");
    }
  }

  state.step_count += 1;
  const T b1 = state.config.beta1, b2 = state.config.beta2;
  const T corr1 = T(1) - static_cast<T>(std::pow(static_cast<double>(b1), state.step_count));
  const T corr2 = T(1) - static_cast<T>(std::pow(static_cast<double>(b2), state.step_count));
  const T lr = state.config.learning_rate;
  const T eps = state.config.epsilon;

  for (std::size_t i = 0; i < params.size(); ++i) {
    T* w = params[i].value->data();
    const T* g = params[i].grad->data();
    T* m = state.first_moment[i].data();
    T* v = state.second_moment[i].data();
    const std::size_t n = params[i].value->size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T m_hat = m[j] / corr1;
      const T v_hat = v[j] / corr2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

}  // namespace mska
