#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "mska/arch/receptive_field.hpp"
#include "mska/arch/spec.hpp"

namespace mska {

namespace detail {

// Five 3x1 conv blocks + classifier shared by MSKACNN and WDCNN.
inline void append_small_kernel_stack(ArchitectureSpec& arch) {
  const int channels[5] = {32, 32, 64, 64, 64};
  for (int c : channels) {
    arch.layers.push_back(LayerDesc::make_conv(3, 1, c, Padding::same, Activation::relu));
    arch.layers.push_back(LayerDesc::make_batchnorm());
    arch.layers.push_back(LayerDesc::make_maxpool(2, 2));
  }
  arch.layers.push_back(LayerDesc::make_flatten());
  arch.layers.push_back(LayerDesc::make_dense(64, Activation::relu));
  arch.layers.push_back(LayerDesc::make_softmax());
}

inline void check_first_layer_plan(std::size_t input_length, const char* which) {
  if (input_length % 16 != 0) {
    throw std::invalid_argument(std::string(which) + ": input length " +
                                std::to_string(input_length) + " is not divisible by stride 16");
  }
  // Canonical design: 6 conv stages, stride 16, widths up to 256, period 1925.
  const auto plans = enumerate_first_layer(static_cast<long long>(input_length),
                                           std::min<long long>(1925, input_length), 6,
                                           {32, 64, 128, 256});
  bool has_stride16 = false;
  for (const auto& p : plans) has_stride16 |= (p.stride == 16);
  if (!has_stride16) {
    throw std::invalid_argument(std::string(which) + ": receptive-field design admits no " +
                                "stride-16 first layer for input length " +
                                std::to_string(input_length));
  }
}

}  // namespace detail

// Multi-size first layer (widths 32/64/128/256, 4 kernels each, stride 16),
// per-branch norm + pool, concat to 16 channels, then five 3x1 conv blocks,
// dense(64) and the softmax head.
inline ArchitectureSpec build_mskacnn(std::size_t input_length = 4096,
                                      std::size_t num_classes = 5) {
  detail::check_first_layer_plan(input_length, "build_mskacnn");
  ArchitectureSpec arch;
  arch.name = "mskacnn";
  arch.input_length = input_length;
  arch.num_classes = num_classes;
  arch.layers.push_back(LayerDesc::make_dropout(0.2));
  arch.layers.push_back(
      LayerDesc::make_multi_conv({32, 64, 128, 256}, 16, 4, Padding::same, Activation::relu));
  arch.layers.push_back(LayerDesc::make_batchnorm());
  arch.layers.push_back(LayerDesc::make_maxpool(2, 2));
  arch.layers.push_back(LayerDesc::make_concat());
  detail::append_small_kernel_stack(arch);
  validate_architecture(arch);
  return arch;
}

// Single wide first-layer kernel (width 64, 16 kernels, stride 16); identical
// to MSKACNN after the concat point.
inline ArchitectureSpec build_wdcnn(std::size_t input_length = 4096,
                                    std::size_t num_classes = 5) {
  detail::check_first_layer_plan(input_length, "build_wdcnn");
  ArchitectureSpec arch;
  arch.name = "wdcnn";
  arch.input_length = input_length;
  arch.num_classes = num_classes;
  arch.layers.push_back(LayerDesc::make_dropout(0.2));
  arch.layers.push_back(LayerDesc::make_conv(64, 16, 16, Padding::same, Activation::relu));
  arch.layers.push_back(LayerDesc::make_batchnorm());
  arch.layers.push_back(LayerDesc::make_maxpool(2, 2));
  detail::append_small_kernel_stack(arch);
  validate_architecture(arch);
  return arch;
}

// Plain fully connected baseline over the flattened window.
inline ArchitectureSpec build_dnn(std::size_t input_length = 4096, std::size_t num_classes = 5) {
  ArchitectureSpec arch;
  arch.name = "dnn";
  arch.input_length = input_length;
  arch.num_classes = num_classes;
  arch.layers.push_back(LayerDesc::make_flatten());
  arch.layers.push_back(LayerDesc::make_dense(300, Activation::relu));
  arch.layers.push_back(LayerDesc::make_dense(100, Activation::relu));
  arch.layers.push_back(LayerDesc::make_softmax());
  validate_architecture(arch);
  return arch;
}

inline ArchitectureSpec build_architecture(const std::string& name,
                                           std::size_t input_length = 4096,
                                           std::size_t num_classes = 5) {
  if (name == "mskacnn") return build_mskacnn(input_length, num_classes);
  if (name == "wdcnn") return build_wdcnn(input_length, num_classes);
  if (name == "dnn") return build_dnn(input_length, num_classes);
  throw std::invalid_argument("unknown model architecture: " + name);
}

}  // namespace mska
