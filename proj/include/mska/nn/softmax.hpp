#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mska/tensor.hpp"

namespace mska {

// Row-wise softmax with max subtraction for stability.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("softmax: expected (batch, classes), got " +
                                logits.shape_string());
  }
  const std::size_t B = logits.extent(0), K = logits.extent(1);
  Tensor<T> probs(logits.shape());
  const T* z = logits.data();
  T* p = probs.data();
  for (std::size_t b = 0; b < B; ++b) {
    const T* zr = z + b * K;
    T* pr = p + b * K;
    T zmax = zr[0];
    for (std::size_t k = 1; k < K; ++k)
      if (zr[k] > zmax) zmax = zr[k];
    T sum = 0;
    for (std::size_t k = 0; k < K; ++k) {
      pr[k] = std::exp(zr[k] - zmax);
      sum += pr[k];
    }
    const T inv = T(1) / sum;
    for (std::size_t k = 0; k < K; ++k) pr[k] *= inv;
  }
  return probs;
}

template <typename T>
struct SoftmaxCrossEntropy {
  T loss;               // mean over the batch of -ln p[label]
  Tensor<T> probs;      // (batch, classes), rows sum to 1
  Tensor<T> logit_grad; // (probs - one_hot) / batch
};

template <typename T>
SoftmaxCrossEntropy<T> softmax_cross_entropy(const Tensor<T>& logits,
                                             const std::vector<std::size_t>& labels) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("softmax_cross_entropy: expected (batch, classes), got " +
                                logits.shape_string());
  }
  const std::size_t B = logits.extent(0), K = logits.extent(1);
  if (labels.size() != B) {
    throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                " labels for batch of " + std::to_string(B));
  }
  for (std::size_t b = 0; b < B; ++b) {
    if (labels[b] >= K) {
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(labels[b]) +
                                  " out of range [0, " + std::to_string(K) + ")");
    }
  }

  SoftmaxCrossEntropy<T> r;
  r.probs = softmax(logits);
  r.logit_grad = Tensor<T>(logits.shape());

  const T* z = logits.data();
  const T* p = r.probs.data();
  T* g = r.logit_grad.data();
  const T inv_batch = T(1) / static_cast<T>(B);
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const T* zr = z + b * K;
    const T* pr = p + b * K;
    T* gr = g + b * K;
    // -ln p[label] computed from logits directly: log-sum-exp minus the
    // label logit, which stays exact when p[label] underflows.
    T zmax = zr[0];
    for (std::size_t k = 1; k < K; ++k)
      if (zr[k] > zmax) zmax = zr[k];
    T sum = 0;
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(zr[k] - zmax);
    loss += static_cast<double>(std::log(sum) + zmax - zr[labels[b]]);
    for (std::size_t k = 0; k < K; ++k) gr[k] = pr[k] * inv_batch;
    gr[labels[b]] -= inv_batch;
  }
  r.loss = static_cast<T>(loss / static_cast<double>(B));
  return r;
}

}  // namespace mska
