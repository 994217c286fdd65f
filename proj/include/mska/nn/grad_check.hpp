#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace mska {

// Central finite-difference check. `loss` re-evaluates the scalar objective
// at the current contents of the probed buffer; `x` is perturbed in place and
// restored. Relative error is |numeric - analytic| / max(1, |numeric|,
// |analytic|), so near-zero gradients are compared absolutely. Returns the
// max over all n entries. Meant to run at 64-bit precision.
template <typename T, typename LossFn>
T finite_difference_max_error(LossFn&& loss, T* x, const T* analytic_grad, std::size_t n, T h) {
  T worst = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    const T saved = x[i];
    x[i] = saved + h;
    const T up = loss();
    x[i] = saved - h;
    const T down = loss();
    x[i] = saved;
    const T numeric = (up - down) / (T(2) * h);
    const T denom = std::max({T(1), std::abs(numeric), std::abs(analytic_grad[i])});
    worst = std::max(worst, std::abs(numeric - analytic_grad[i]) / denom);
  }
  return worst;
}

}  // namespace mska
