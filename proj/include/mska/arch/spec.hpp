#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mska/nn/common.hpp"

namespace mska {

enum class LayerKind {
  dropout,
  multi_conv,
  conv,
  batchnorm,
  maxpool,
  concat,
  flatten,
  dense,
  softmax
};

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::dropout: return "dropout";
    case LayerKind::multi_conv: return "multi_conv";
    case LayerKind::conv: return "conv";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::concat: return "concat";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "dropout") return LayerKind::dropout;
  if (s == "multi_conv") return LayerKind::multi_conv;
  if (s == "conv") return LayerKind::conv;
  if (s == "batchnorm") return LayerKind::batchnorm;
  if (s == "maxpool") return LayerKind::maxpool;
  if (s == "concat") return LayerKind::concat;
  if (s == "flatten") return LayerKind::flatten;
  if (s == "dense") return LayerKind::dense;
  if (s == "softmax") return LayerKind::softmax;
  throw std::invalid_argument("unknown layer kind: " + s);
}

// One layer descriptor; the fields used depend on `kind`. Convolution
// activations are applied after the batch norm that immediately follows the
// convolution (conv -> norm -> activation), or directly after the
// convolution when no batch norm follows.
struct LayerDesc {
  LayerKind kind{};
  std::vector<int> widths;      // multi_conv: kernel width per branch
  int kernels_per_width = 0;    // multi_conv
  int width = 0;                // conv kernel / maxpool window
  int stride = 1;               // conv / multi_conv / maxpool
  int channels = 0;             // conv output channels
  Padding padding = Padding::same;
  Activation activation = Activation::linear;  // conv / multi_conv / dense
  int units = 0;                // dense
  double rate = 0.0;            // dropout
  double epsilon = 1e-5;        // batchnorm

  static LayerDesc make_dropout(double rate) {
    LayerDesc d;
    d.kind = LayerKind::dropout;
    d.rate = rate;
    return d;
  }
  static LayerDesc make_multi_conv(std::vector<int> widths, int stride, int kernels_per_width,
                                   Padding padding = Padding::same,
                                   Activation act = Activation::linear) {
    LayerDesc d;
    d.kind = LayerKind::multi_conv;
    d.widths = std::move(widths);
    d.stride = stride;
    d.kernels_per_width = kernels_per_width;
    d.padding = padding;
    d.activation = act;
    return d;
  }
  static LayerDesc make_conv(int width, int stride, int channels,
                             Padding padding = Padding::same,
                             Activation act = Activation::linear) {
    LayerDesc d;
    d.kind = LayerKind::conv;
    d.width = width;
    d.stride = stride;
    d.channels = channels;
    d.padding = padding;
    d.activation = act;
    return d;
  }
  static LayerDesc make_batchnorm(double epsilon = 1e-5) {
    LayerDesc d;
    d.kind = LayerKind::batchnorm;
    d.epsilon = epsilon;
    return d;
  }
  static LayerDesc make_maxpool(int width, int stride) {
    LayerDesc d;
    d.kind = LayerKind::maxpool;
    d.width = width;
    d.stride = stride;
    return d;
  }
  static LayerDesc make_concat() {
    LayerDesc d;
    d.kind = LayerKind::concat;
    return d;
  }
  static LayerDesc make_flatten() {
    LayerDesc d;
    d.kind = LayerKind::flatten;
    return d;
  }
  static LayerDesc make_dense(int units, Activation act) {
    LayerDesc d;
    d.kind = LayerKind::dense;
    d.units = units;
    d.activation = act;
    return d;
  }
  static LayerDesc make_softmax() {
    LayerDesc d;
    d.kind = LayerKind::softmax;
    return d;
  }
};

// Ordered layer descriptors plus the input/output contract. The softmax
// descriptor is the classifier head: a dense projection to num_classes
// followed by exp-normalized softmax.
struct ArchitectureSpec {
  std::string name;
  std::size_t input_length = 0;
  std::size_t input_channels = 1;
  std::size_t num_classes = 0;
  std::vector<LayerDesc> layers;
};

// Shape of the value flowing out of a layer: either a set of equally shaped
// (length x channels) branches or, after flatten, a flat feature vector.
struct LayerShape {
  bool flat = false;
  std::size_t branches = 1;
  std::size_t length = 0;
  std::size_t channels = 0;
  std::size_t features = 0;  // only when flat

  std::string to_string() const {
    if (flat) return "(" + std::to_string(features) + ")";
    std::string s = "(" + std::to_string(length) + ", " + std::to_string(channels) + ")";
    if (branches > 1) s += " x " + std::to_string(branches);
    return s;
  }
};

namespace detail {

inline std::size_t conv_out_length(std::size_t length, int width, int stride, Padding padding,
                                   std::size_t layer_index) {
  if (width < 1 || stride < 1) {
    throw std::invalid_argument("layer " + std::to_string(layer_index) +
                                ": conv width and stride must be >= 1");
  }
  const auto w = static_cast<std::size_t>(width);
  const auto s = static_cast<std::size_t>(stride);
  if (padding == Padding::valid) {
    if (length < w) {
      throw std::invalid_argument("layer " + std::to_string(layer_index) +
                                  ": input length " + std::to_string(length) +
                                  " < kernel width with valid padding");
    }
    return (length - w) / s + 1;
  }
  return (length + s - 1) / s;
}

}  // namespace detail

// Walks the descriptor chain verifying consecutive shape compatibility and
// the exactly-one-softmax-last rule. Returns the output shape of every layer.
inline std::vector<LayerShape> validate_architecture(const ArchitectureSpec& arch) {
  if (arch.input_length == 0 || arch.input_channels == 0) {
    throw std::invalid_argument("architecture: input shape must be set");
  }
  if (arch.num_classes == 0) throw std::invalid_argument("architecture: num_classes must be set");
  if (arch.layers.empty()) throw std::invalid_argument("architecture: no layers");

  LayerShape cur;
  cur.length = arch.input_length;
  cur.channels = arch.input_channels;
  std::vector<LayerShape> out;
  out.reserve(arch.layers.size());
  bool saw_softmax = false;

  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerDesc& d = arch.layers[i];
    if (saw_softmax) {
      throw std::invalid_argument("architecture: softmax must be the last layer");
    }
    switch (d.kind) {
      case LayerKind::dropout:
        if (!(d.rate >= 0.0 && d.rate < 1.0)) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": dropout rate must lie in [0, 1)");
        }
        break;
      case LayerKind::multi_conv: {
        if (cur.flat || cur.branches != 1) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": multi_conv needs a single unflattened input");
        }
        if (d.widths.empty() || d.kernels_per_width < 1) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": multi_conv needs widths and kernels_per_width");
        }
        std::size_t len = 0;
        for (std::size_t bi = 0; bi < d.widths.size(); ++bi) {
          const std::size_t l =
              detail::conv_out_length(cur.length, d.widths[bi], d.stride, d.padding, i);
          if (bi == 0) {
            len = l;
          } else if (l != len) {
            throw std::invalid_argument("layer " + std::to_string(i) +
                                        ": multi_conv branches disagree on output length");
          }
        }
        cur.branches = d.widths.size();
        cur.length = len;
        cur.channels = static_cast<std::size_t>(d.kernels_per_width);
        break;
      }
      case LayerKind::conv:
        if (cur.flat) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": conv after flatten");
        }
        if (d.channels < 1) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": conv needs a positive channel count");
        }
        cur.length = detail::conv_out_length(cur.length, d.width, d.stride, d.padding, i);
        cur.channels = static_cast<std::size_t>(d.channels);
        break;
      case LayerKind::batchnorm:
        if (cur.flat) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": batchnorm after flatten");
        }
        if (!(d.epsilon >= 0.0)) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": batchnorm epsilon must be >= 0");
        }
        break;
      case LayerKind::maxpool:
        if (cur.flat) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": maxpool after flatten");
        }
        if (d.width < 1 || d.stride < 1) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": maxpool width and stride must be >= 1");
        }
        if (static_cast<std::size_t>(d.width) > cur.length) {
          throw std::invalid_argument("layer " + std::to_string(i) + ": maxpool window " +
                                      std::to_string(d.width) + " exceeds length " +
                                      std::to_string(cur.length));
        }
        cur.length =
            (cur.length - static_cast<std::size_t>(d.width)) / static_cast<std::size_t>(d.stride) +
            1;
        break;
      case LayerKind::concat:
        if (cur.flat) {
          throw std::invalid_argument("layer " + std::to_string(i) + ": concat after flatten");
        }
        cur.channels *= cur.branches;
        cur.branches = 1;
        break;
      case LayerKind::flatten:
        if (cur.flat || cur.branches != 1) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": flatten needs a single unflattened input");
        }
        cur.flat = true;
        cur.features = cur.length * cur.channels;
        cur.length = 0;
        cur.channels = 0;
        break;
      case LayerKind::dense:
        if (!cur.flat) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": dense requires a flattened input");
        }
        if (d.units < 1) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": dense needs a positive unit count");
        }
        cur.features = static_cast<std::size_t>(d.units);
        break;
      case LayerKind::softmax:
        if (!cur.flat) {
          throw std::invalid_argument("layer " + std::to_string(i) +
                                      ": softmax requires a flattened input");
        }
        cur.features = arch.num_classes;
        saw_softmax = true;
        break;
    }
    out.push_back(cur);
  }
  if (!saw_softmax) {
    throw std::invalid_argument("architecture: missing softmax output layer");
  }
  return out;
}

inline nlohmann::ordered_json architecture_to_json(const ArchitectureSpec& arch) {
  nlohmann::ordered_json j;
  j["name"] = arch.name;
  j["input_length"] = arch.input_length;
  j["input_channels"] = arch.input_channels;
  j["num_classes"] = arch.num_classes;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const LayerDesc& d : arch.layers) {
    nlohmann::ordered_json l;
    l["kind"] = to_string(d.kind);
    switch (d.kind) {
      case LayerKind::dropout:
        l["rate"] = d.rate;
        break;
      case LayerKind::multi_conv:
        l["widths"] = d.widths;
        l["stride"] = d.stride;
        l["kernels_per_width"] = d.kernels_per_width;
        l["padding"] = d.padding == Padding::same ? "same" : "valid";
        l["activation"] = to_string(d.activation);
        break;
      case LayerKind::conv:
        l["width"] = d.width;
        l["stride"] = d.stride;
        l["channels"] = d.channels;
        l["padding"] = d.padding == Padding::same ? "same" : "valid";
        l["activation"] = to_string(d.activation);
        break;
      case LayerKind::batchnorm:
        l["epsilon"] = d.epsilon;
        break;
      case LayerKind::maxpool:
        l["width"] = d.width;
        l["stride"] = d.stride;
        break;
      case LayerKind::dense:
        l["units"] = d.units;
        l["activation"] = to_string(d.activation);
        break;
      case LayerKind::concat:
      case LayerKind::flatten:
      case LayerKind::softmax:
        break;
    }
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j;
}

inline ArchitectureSpec architecture_from_json(const nlohmann::json& j) {
  ArchitectureSpec arch;
  arch.name = j.value("name", std::string());
  arch.input_length = j.at("input_length").get<std::size_t>();
  arch.input_channels = j.value("input_channels", std::size_t{1});
  arch.num_classes = j.at("num_classes").get<std::size_t>();
  for (const auto& l : j.at("layers")) {
    LayerDesc d;
    d.kind = layer_kind_from_string(l.at("kind").get<std::string>());
    switch (d.kind) {
      case LayerKind::dropout:
        d.rate = l.at("rate").get<double>();
        break;
      case LayerKind::multi_conv:
        d.widths = l.at("widths").get<std::vector<int>>();
        d.stride = l.at("stride").get<int>();
        d.kernels_per_width = l.at("kernels_per_width").get<int>();
        d.padding = l.value("padding", std::string("same")) == "valid" ? Padding::valid
                                                                       : Padding::same;
        d.activation = activation_from_string(l.value("activation", std::string("linear")));
        break;
      case LayerKind::conv:
        d.width = l.at("width").get<int>();
        d.stride = l.at("stride").get<int>();
        d.channels = l.at("channels").get<int>();
        d.padding = l.value("padding", std::string("same")) == "valid" ? Padding::valid
                                                                       : Padding::same;
        d.activation = activation_from_string(l.value("activation", std::string("linear")));
        break;
      case LayerKind::batchnorm:
        d.epsilon = l.value("epsilon", 1e-5);
        break;
      case LayerKind::maxpool:
        d.width = l.at("width").get<int>();
        d.stride = l.at("stride").get<int>();
        break;
      case LayerKind::dense:
        d.units = l.at("units").get<int>();
        d.activation = activation_from_string(l.at("activation").get<std::string>());
        break;
      case LayerKind::concat:
      case LayerKind::flatten:
      case LayerKind::softmax:
        break;
    }
    arch.layers.push_back(std::move(d));
  }
  return arch;
}

}  // namespace mska
