#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mska {

// Receptive-field design for a stack of n conv+pool stages where every stage
// after the first is fixed at kernel width 3, stride 1, pool 2. R[l] is the
// receptive field of one neuron of stage l's pooling output measured in
// stage-(l-1) samples; R[0] is measured in input samples.

// Closed form for the first hidden stage: R(1) = 3 * 2^(n-1) - 2.
inline long long first_stage_receptive_field(int n_layers) {
  if (n_layers < 1) throw std::invalid_argument("receptive field: need n_layers >= 1");
  return 3LL * (1LL << (n_layers - 1)) - 2;
}

// R(0) = S1 * (3 * 2^n - 5) + W1.
inline long long receptive_field(int n_layers, long long first_stride, long long first_width) {
  if (first_stride < 1 || first_width < 1) {
    throw std::invalid_argument("receptive field: stride and width must be >= 1");
  }
  return first_stride * (3LL * (1LL << n_layers) - 5) + first_width;
}

// Unrolled chain R[n] = 1, R[l-1] = 2 R[l] + 2 (l > 1),
// R[0] = S1 (2 R[1] - 1) + W1. Index i holds R[i].
inline std::vector<long long> receptive_field_chain(int n_layers, long long first_stride,
                                                    long long first_width) {
  if (n_layers < 1) throw std::invalid_argument("receptive field: need n_layers >= 1");
  std::vector<long long> r(static_cast<std::size_t>(n_layers) + 1);
  r[static_cast<std::size_t>(n_layers)] = 1;
  for (int l = n_layers; l > 1; --l) {
    r[static_cast<std::size_t>(l - 1)] = 2 * r[static_cast<std::size_t>(l)] + 2;
  }
  r[0] = first_stride * (2 * r[1] - 1) + first_width;
  return r;
}

struct FirstLayerPlan {
  long long stride = 0;
  long long width = 0;
  long long input_field = 0;  // R(0)
};

// All (stride, width) pairs with stride dividing the input length and a
// receptive field covering at least one revolution (N samples) without
// exceeding the input. Sorted by stride then width; empty result is valid.
inline std::vector<FirstLayerPlan> enumerate_first_layer(long long input_length,
                                                         long long period_samples, int n_layers,
                                                         const std::vector<long long>& widths) {
  if (input_length < 1 || period_samples < 1) {
    throw std::invalid_argument("enumerate_first_layer: lengths must be positive");
  }
  if (period_samples > input_length) {
    throw std::invalid_argument("enumerate_first_layer: period exceeds input length");
  }
  std::vector<FirstLayerPlan> plans;
  for (long long s = 1; s <= input_length; ++s) {
    if (input_length % s != 0) continue;
    for (long long w : widths) {
      const long long r0 = receptive_field(n_layers, s, w);
      if (r0 >= period_samples && r0 <= input_length) {
        plans.push_back({s, w, r0});
      }
    }
  }
  return plans;
}

}  // namespace mska
