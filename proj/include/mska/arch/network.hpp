#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mska/arch/spec.hpp"
#include "mska/nn/activation.hpp"
#include "mska/nn/adam.hpp"
#include "mska/nn/batchnorm.hpp"
#include "mska/nn/conv.hpp"
#include "mska/nn/dense.hpp"
#include "mska/nn/dropout.hpp"
#include "mska/nn/pool.hpp"
#include "mska/nn/softmax.hpp"
#include "mska/rng.hpp"
#include "mska/tensor.hpp"

namespace mska {

// train: dropout active, batch norm normalizes with current-batch statistics
//        and accumulates them, caches are kept for backward.
// accumulate_stats: forward-only AdBN statistics pass (batch-stat
//        normalization + accumulation, no dropout, no caches).
// infer: deterministic inference with the accumulated average statistics.
enum class ForwardMode { train, accumulate_stats, infer };

// A runtime model instantiated from an ArchitectureSpec: owns all learned
// parameters, gradient buffers and forward caches. Copyable by value; a copy
// carries independent statistics, which is how AdBN evaluation adapts to a
// test set without touching the trained model.
template <typename T>
class Model {
 public:
  using Branches = std::vector<Tensor<T>>;
  // Called with each descriptor's index and output value (per-branch).
  using Observer = std::function<void(std::size_t, const Branches&)>;

  Model() = default;

  Model(ArchitectureSpec arch, std::uint64_t seed) : arch_(std::move(arch)) {
    shapes_ = validate_architecture(arch_);
    build_nodes();
    SplitMix64 rng(seed);
    init_params(rng);
  }

  const ArchitectureSpec& architecture() const { return arch_; }
  const std::vector<LayerShape>& layer_shapes() const { return shapes_; }

  // Returns logits (batch, num_classes). Input is (batch, length, channels).
  Tensor<T> forward(const Tensor<T>& batch, ForwardMode mode, SplitMix64* rng = nullptr,
                    const Observer* observer = nullptr) {
    if (batch.rank() != 3 || batch.extent(1) != arch_.input_length ||
        batch.extent(2) != arch_.input_channels) {
      throw std::invalid_argument(
          "model forward: expected (batch, " + std::to_string(arch_.input_length) + ", " +
          std::to_string(arch_.input_channels) + "), got " + batch.shape_string());
    }
    caches_valid_ = (mode == ForwardMode::train);
    Branches value{batch};
    for (std::size_t e = 0; e < entries_.size(); ++e) {
      value = std::visit([&](auto& node) { return step(node, std::move(value), mode, rng); },
                         entries_[e].node);
      if (observer) {
        const bool last_for_desc =
            e + 1 == entries_.size() || entries_[e + 1].desc_index != entries_[e].desc_index;
        if (last_for_desc) (*observer)(entries_[e].desc_index, value);
      }
    }
    return std::move(value[0]);
  }

  Tensor<T> posteriors(const Tensor<T>& batch, ForwardMode mode, SplitMix64* rng = nullptr) {
    return softmax(forward(batch, mode, rng));
  }

  void zero_grads() {
    for (auto& entry : entries_) {
      std::visit([](auto& node) { zero_node_grads(node); }, entry.node);
    }
  }

  // Accumulates parameter gradients from the caches of the last train-mode
  // forward pass.
  void backward(const Tensor<T>& logit_grad) {
    if (!caches_valid_) {
      throw std::logic_error("model backward: no train-mode forward pass cached");
    }
    Branches grad{logit_grad};
    for (std::size_t e = entries_.size(); e-- > 0;) {
      grad = std::visit([&](auto& node) { return step_back(node, std::move(grad)); },
                        entries_[e].node);
    }
  }

  std::vector<ParamRef<T>> trainable_params() {
    std::vector<ParamRef<T>> out;
    for (auto& entry : entries_) {
      const std::string prefix = "layer" + std::to_string(entry.desc_index);
      if (auto* mc = std::get_if<MultiConvNode>(&entry.node)) {
        for (std::size_t b = 0; b < mc->branch.size(); ++b) {
          auto& s = mc->branch[b];
          out.push_back({prefix + ".conv" + std::to_string(b) + ".kernels", &s.kernels,
                         &s.kernel_grad});
          out.push_back({prefix + ".conv" + std::to_string(b) + ".bias", &s.bias, &s.bias_grad});
        }
      } else if (auto* cv = std::get_if<ConvNode>(&entry.node)) {
        out.push_back({prefix + ".conv.kernels", &cv->state.kernels, &cv->state.kernel_grad});
        out.push_back({prefix + ".conv.bias", &cv->state.bias, &cv->state.bias_grad});
      } else if (auto* bn = std::get_if<BatchNormNode>(&entry.node)) {
        for (std::size_t b = 0; b < bn->branch.size(); ++b) {
          auto& s = bn->branch[b];
          const std::string tag = bn->branch.size() > 1 ? std::to_string(b) : std::string();
          out.push_back({prefix + ".bn" + tag + ".scale", &s.scale, &s.scale_grad});
          out.push_back({prefix + ".bn" + tag + ".offset", &s.offset, &s.offset_grad});
        }
      } else if (auto* dn = std::get_if<DenseNode>(&entry.node)) {
        out.push_back({prefix + ".dense.weights", &dn->state.weights, &dn->state.weight_grad});
        out.push_back({prefix + ".dense.bias", &dn->state.bias, &dn->state.bias_grad});
      } else if (auto* hd = std::get_if<HeadNode>(&entry.node)) {
        out.push_back({prefix + ".softmax.weights", &hd->state.weights, &hd->state.weight_grad});
        out.push_back({prefix + ".softmax.bias", &hd->state.bias, &hd->state.bias_grad});
      }
    }
    return out;
  }

  void reset_bn_accumulators() {
    for (auto& entry : entries_) {
      if (auto* bn = std::get_if<BatchNormNode>(&entry.node)) {
        for (auto& s : bn->branch) s.reset_accumulators();
      }
    }
  }

  // True when every batch-norm layer holds usable averaged statistics.
  bool has_bn_statistics() const {
    for (const auto& entry : entries_) {
      if (const auto* bn = std::get_if<BatchNormNode>(&entry.node)) {
        for (const auto& s : bn->branch) {
          if (s.batch_count == 0) return false;
        }
      }
    }
    return true;
  }

  void zero_biases() {
    for (auto& entry : entries_) {
      if (auto* mc = std::get_if<MultiConvNode>(&entry.node)) {
        for (auto& s : mc->branch) s.bias.fill(T(0));
      } else if (auto* cv = std::get_if<ConvNode>(&entry.node)) {
        cv->state.bias.fill(T(0));
      } else if (auto* dn = std::get_if<DenseNode>(&entry.node)) {
        dn->state.bias.fill(T(0));
      } else if (auto* hd = std::get_if<HeadNode>(&entry.node)) {
        hd->state.bias.fill(T(0));
      }
    }
  }

  // Flat 32-bit snapshot of one descriptor's parameters (empty for
  // parameterless layers). Batch-norm blobs end with the batch counter.
  std::vector<float> export_layer_values(std::size_t desc_index) const {
    std::vector<float> out;
    visit_layer_values(desc_index, [&](const Tensor<T>& t) {
      for (std::size_t i = 0; i < t.size(); ++i) out.push_back(static_cast<float>(t[i]));
    }, [&](long counter) { out.push_back(static_cast<float>(counter)); });
    return out;
  }

  std::size_t layer_value_count(std::size_t desc_index) const {
    std::size_t n = 0;
    visit_layer_values(desc_index, [&](const Tensor<T>& t) { n += t.size(); },
                       [&](long) { n += 1; });
    return n;
  }

  void import_layer_values(std::size_t desc_index, const std::vector<float>& values) {
    if (values.size() != layer_value_count(desc_index)) {
      throw std::invalid_argument("import_layer_values: size mismatch at layer " +
                                  std::to_string(desc_index));
    }
    std::size_t pos = 0;
    mutate_layer_values(
        desc_index,
        [&](Tensor<T>& t) {
          for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(values[pos++]);
        },
        [&](long& counter) { counter = static_cast<long>(values[pos++]); });
  }

  template <typename U>
  Model<U> cast() const {
    Model<U> other;
    other.arch_ = arch_;
    other.shapes_ = shapes_;
    other.build_nodes();
    for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
      const auto vals = export_layer_values(i);
      if (!vals.empty()) other.import_layer_values(i, vals);
    }
    return other;
  }

 private:
  template <typename U>
  friend class Model;

  struct DropoutNode {
    T rate;
    Branches masks;
  };
  struct MultiConvNode {
    std::vector<ConvLayerState<T>> branch;
    Tensor<T> input;
  };
  struct ConvNode {
    ConvLayerState<T> state;
    Branches inputs;
  };
  struct BatchNormNode {
    std::vector<BatchNormState<T>> branch;
    Branches inputs;
  };
  struct ActNode {
    Activation kind;
    Branches inputs;
  };
  struct MaxPoolNode {
    int width;
    int stride;
    Branches inputs;
  };
  struct ConcatNode {
    std::size_t in_branches;
    std::size_t in_channels;
  };
  struct FlattenNode {
    std::size_t length;
    std::size_t channels;
  };
  struct DenseNode {
    DenseLayerState<T> state;
    Activation act;
    Tensor<T> input;
    Tensor<T> preact;
  };
  struct HeadNode {
    DenseLayerState<T> state;
    Tensor<T> input;
  };
  using Node = std::variant<DropoutNode, MultiConvNode, ConvNode, BatchNormNode, ActNode,
                            MaxPoolNode, ConcatNode, FlattenNode, DenseNode, HeadNode>;
  struct Entry {
    std::size_t desc_index;
    Node node;
  };

  void build_nodes() {
    entries_.clear();
    LayerShape in;
    in.length = arch_.input_length;
    in.channels = arch_.input_channels;
    for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
      const LayerDesc& d = arch_.layers[i];
      switch (d.kind) {
        case LayerKind::dropout:
          entries_.push_back({i, DropoutNode{static_cast<T>(d.rate), {}}});
          break;
        case LayerKind::multi_conv: {
          MultiConvNode node;
          for (int w : d.widths) {
            node.branch.push_back(ConvLayerState<T>::make(
                static_cast<std::size_t>(w), in.channels,
                static_cast<std::size_t>(d.kernels_per_width), d.stride, d.padding));
          }
          entries_.push_back({i, std::move(node)});
          push_activation(i, d.activation);
          break;
        }
        case LayerKind::conv: {
          ConvNode node{ConvLayerState<T>::make(static_cast<std::size_t>(d.width), in.channels,
                                                static_cast<std::size_t>(d.channels), d.stride,
                                                d.padding),
                        {}};
          entries_.push_back({i, std::move(node)});
          push_activation(i, d.activation);
          break;
        }
        case LayerKind::batchnorm: {
          BatchNormNode node;
          for (std::size_t b = 0; b < in.branches; ++b) {
            node.branch.push_back(BatchNormState<T>::make(in.channels, static_cast<T>(d.epsilon)));
          }
          entries_.push_back({i, std::move(node)});
          if (pending_act_ != Activation::linear) {
            entries_.push_back({i, ActNode{pending_act_, {}}});
            pending_act_ = Activation::linear;
          }
          break;
        }
        case LayerKind::maxpool:
          entries_.push_back({i, MaxPoolNode{d.width, d.stride, {}}});
          break;
        case LayerKind::concat:
          entries_.push_back({i, ConcatNode{in.branches, in.channels}});
          break;
        case LayerKind::flatten:
          entries_.push_back({i, FlattenNode{in.length, in.channels}});
          break;
        case LayerKind::dense:
          entries_.push_back(
              {i, DenseNode{DenseLayerState<T>::make(in.features, static_cast<std::size_t>(d.units)),
                            d.activation,
                            {},
                            {}}});
          break;
        case LayerKind::softmax:
          entries_.push_back(
              {i, HeadNode{DenseLayerState<T>::make(in.features, arch_.num_classes), {}}});
          break;
      }
      in = shapes_[i];
    }
    // A trailing conv activation with no batchnorm between it and the next
    // layer kind was already emitted inline; nothing can remain pending.
    if (pending_act_ != Activation::linear) {
      throw std::logic_error("model build: dangling activation");
    }
  }

  // Conv activations run after an immediately following batch norm.
  void push_activation(std::size_t desc_index, Activation act) {
    if (act == Activation::linear) return;
    const bool bn_next = desc_index + 1 < arch_.layers.size() &&
                         arch_.layers[desc_index + 1].kind == LayerKind::batchnorm;
    if (bn_next) {
      pending_act_ = act;
    } else {
      entries_.push_back({desc_index, ActNode{act, {}}});
    }
  }

  void init_params(SplitMix64& rng) {
    auto he_uniform = [&](Tensor<T>& t, std::size_t fan_in) {
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<T>(rng.uniform(-bound, bound));
    };
    for (auto& entry : entries_) {
      if (auto* mc = std::get_if<MultiConvNode>(&entry.node)) {
        for (auto& s : mc->branch) he_uniform(s.kernels, s.width() * s.in_channels());
      } else if (auto* cv = std::get_if<ConvNode>(&entry.node)) {
        he_uniform(cv->state.kernels, cv->state.width() * cv->state.in_channels());
      } else if (auto* dn = std::get_if<DenseNode>(&entry.node)) {
        he_uniform(dn->state.weights, dn->state.in_size());
      } else if (auto* hd = std::get_if<HeadNode>(&entry.node)) {
        he_uniform(hd->state.weights, hd->state.in_size());
      }
    }
  }

  // ---- forward steps ----

  Branches step(DropoutNode& node, Branches v, ForwardMode mode, SplitMix64* rng) {
    if (mode != ForwardMode::train || node.rate == T(0)) {
      if (caches_valid_) {
        node.masks.clear();
        for (auto& t : v) node.masks.push_back(Tensor<T>::full(t.shape(), T(1)));
      }
      return v;
    }
    if (rng == nullptr) {
      throw std::invalid_argument("model forward: dropout in train mode needs an rng");
    }
    node.masks.clear();
    Branches out;
    for (auto& t : v) {
      auto r = dropout_forward(t, node.rate, DropoutMode::train, rng);
      out.push_back(std::move(r.output));
      node.masks.push_back(std::move(r.mask));
    }
    return out;
  }

  Branches step(MultiConvNode& node, Branches v, ForwardMode mode, SplitMix64*) {
    (void)mode;
    if (v.size() != 1) throw std::logic_error("multi_conv: expected a single input branch");
    Branches out;
    out.reserve(node.branch.size());
    for (auto& s : node.branch) out.push_back(conv1d_forward(v[0], s));
    if (caches_valid_) node.input = std::move(v[0]);
    return out;
  }

  Branches step(ConvNode& node, Branches v, ForwardMode, SplitMix64*) {
    Branches out;
    out.reserve(v.size());
    for (auto& t : v) out.push_back(conv1d_forward(t, node.state));
    if (caches_valid_) node.inputs = std::move(v);
    return out;
  }

  Branches step(BatchNormNode& node, Branches v, ForwardMode mode, SplitMix64*) {
    if (v.size() != node.branch.size()) throw std::logic_error("batchnorm: branch count mismatch");
    const BatchNormMode m =
        mode == ForwardMode::infer ? BatchNormMode::adapt_eval : BatchNormMode::train;
    Branches out;
    out.reserve(v.size());
    for (std::size_t b = 0; b < v.size(); ++b) {
      out.push_back(batchnorm_forward(v[b], node.branch[b], m));
    }
    if (caches_valid_) node.inputs = std::move(v);
    return out;
  }

  Branches step(ActNode& node, Branches v, ForwardMode, SplitMix64*) {
    Branches out;
    out.reserve(v.size());
    for (auto& t : v) out.push_back(activation_forward(t, node.kind));
    if (caches_valid_) node.inputs = std::move(v);
    return out;
  }

  Branches step(MaxPoolNode& node, Branches v, ForwardMode, SplitMix64*) {
    Branches out;
    out.reserve(v.size());
    for (auto& t : v) out.push_back(pool1d_forward(t, node.width, node.stride, PoolKind::max));
    if (caches_valid_) node.inputs = std::move(v);
    return out;
  }

  Branches step(ConcatNode& node, Branches v, ForwardMode, SplitMix64*) {
    const std::size_t B = v[0].extent(0), L = v[0].extent(1);
    const std::size_t C = node.in_channels;
    Tensor<T> merged({B, L, C * v.size()});
    for (std::size_t b = 0; b < v.size(); ++b) {
      const T* src = v[b].data();
      T* dst = merged.data() + b * C;
      const std::size_t out_stride = C * v.size();
      for (std::size_t row = 0; row < B * L; ++row) {
        for (std::size_t c = 0; c < C; ++c) dst[row * out_stride + c] = src[row * C + c];
      }
    }
    Branches out;
    out.push_back(std::move(merged));
    return out;
  }

  Branches step(FlattenNode& node, Branches v, ForwardMode, SplitMix64*) {
    const std::size_t B = v[0].extent(0);
    Branches out;
    out.push_back(v[0].reshaped({B, node.length * node.channels}));
    return out;
  }

  Branches step(DenseNode& node, Branches v, ForwardMode, SplitMix64*) {
    Tensor<T> pre = dense_forward(v[0], node.state);
    Tensor<T> post = activation_forward(pre, node.act);
    if (caches_valid_) {
      node.input = std::move(v[0]);
      node.preact = std::move(pre);
    }
    Branches out;
    out.push_back(std::move(post));
    return out;
  }

  Branches step(HeadNode& node, Branches v, ForwardMode, SplitMix64*) {
    Tensor<T> logits = dense_forward(v[0], node.state);
    if (caches_valid_) node.input = std::move(v[0]);
    Branches out;
    out.push_back(std::move(logits));
    return out;
  }

  // ---- backward steps ----

  Branches step_back(DropoutNode& node, Branches g) {
    Branches out;
    out.reserve(g.size());
    for (std::size_t b = 0; b < g.size(); ++b) {
      out.push_back(dropout_backward(node.masks[b], g[b]));
    }
    return out;
  }

  Branches step_back(MultiConvNode& node, Branches g) {
    Tensor<T> input_grad(node.input.shape());
    for (std::size_t b = 0; b < node.branch.size(); ++b) {
      auto grads = conv1d_backward(node.input, node.branch[b], g[b]);
      accumulate(node.branch[b].kernel_grad, grads.kernel_grad);
      accumulate(node.branch[b].bias_grad, grads.bias_grad);
      accumulate(input_grad, grads.input_grad);
    }
    Branches out;
    out.push_back(std::move(input_grad));
    return out;
  }

  Branches step_back(ConvNode& node, Branches g) {
    Branches out;
    out.reserve(g.size());
    for (std::size_t b = 0; b < g.size(); ++b) {
      auto grads = conv1d_backward(node.inputs[b], node.state, g[b]);
      accumulate(node.state.kernel_grad, grads.kernel_grad);
      accumulate(node.state.bias_grad, grads.bias_grad);
      out.push_back(std::move(grads.input_grad));
    }
    return out;
  }

  Branches step_back(BatchNormNode& node, Branches g) {
    Branches out;
    out.reserve(g.size());
    for (std::size_t b = 0; b < g.size(); ++b) {
      auto grads = batchnorm_backward(node.inputs[b], node.branch[b], g[b]);
      accumulate(node.branch[b].scale_grad, grads.scale_grad);
      accumulate(node.branch[b].offset_grad, grads.offset_grad);
      out.push_back(std::move(grads.input_grad));
    }
    return out;
  }

  Branches step_back(ActNode& node, Branches g) {
    Branches out;
    out.reserve(g.size());
    for (std::size_t b = 0; b < g.size(); ++b) {
      out.push_back(activation_backward(node.inputs[b], node.kind, g[b]));
    }
    return out;
  }

  Branches step_back(MaxPoolNode& node, Branches g) {
    Branches out;
    out.reserve(g.size());
    for (std::size_t b = 0; b < g.size(); ++b) {
      out.push_back(pool1d_backward(node.inputs[b], node.width, node.stride, PoolKind::max, g[b]));
    }
    return out;
  }

  Branches step_back(ConcatNode& node, Branches g) {
    const std::size_t B = g[0].extent(0), L = g[0].extent(1);
    const std::size_t C = node.in_channels;
    const std::size_t merged_c = g[0].extent(2);
    Branches out;
    for (std::size_t b = 0; b < node.in_branches; ++b) {
      Tensor<T> part({B, L, C});
      const T* src = g[0].data() + b * C;
      T* dst = part.data();
      for (std::size_t row = 0; row < B * L; ++row) {
        for (std::size_t c = 0; c < C; ++c) dst[row * C + c] = src[row * merged_c + c];
      }
      out.push_back(std::move(part));
    }
    return out;
  }

  Branches step_back(FlattenNode& node, Branches g) {
    const std::size_t B = g[0].extent(0);
    Branches out;
    out.push_back(g[0].reshaped({B, node.length, node.channels}));
    return out;
  }

  Branches step_back(DenseNode& node, Branches g) {
    Tensor<T> pre_grad = activation_backward(node.preact, node.act, g[0]);
    auto grads = dense_backward(node.input, node.state, pre_grad);
    accumulate(node.state.weight_grad, grads.weight_grad);
    accumulate(node.state.bias_grad, grads.bias_grad);
    Branches out;
    out.push_back(std::move(grads.input_grad));
    return out;
  }

  Branches step_back(HeadNode& node, Branches g) {
    auto grads = dense_backward(node.input, node.state, g[0]);
    accumulate(node.state.weight_grad, grads.weight_grad);
    accumulate(node.state.bias_grad, grads.bias_grad);
    Branches out;
    out.push_back(std::move(grads.input_grad));
    return out;
  }

  static void accumulate(Tensor<T>& into, const Tensor<T>& from) {
    T* a = into.data();
    const T* b = from.data();
    for (std::size_t i = 0; i < into.size(); ++i) a[i] += b[i];
  }

  static void zero_node_grads(DropoutNode&) {}
  static void zero_node_grads(MultiConvNode& n) {
    for (auto& s : n.branch) {
      s.kernel_grad.fill(T(0));
      s.bias_grad.fill(T(0));
    }
  }
  static void zero_node_grads(ConvNode& n) {
    n.state.kernel_grad.fill(T(0));
    n.state.bias_grad.fill(T(0));
  }
  static void zero_node_grads(BatchNormNode& n) {
    for (auto& s : n.branch) {
      s.scale_grad.fill(T(0));
      s.offset_grad.fill(T(0));
    }
  }
  static void zero_node_grads(ActNode&) {}
  static void zero_node_grads(MaxPoolNode&) {}
  static void zero_node_grads(ConcatNode&) {}
  static void zero_node_grads(FlattenNode&) {}
  static void zero_node_grads(DenseNode& n) {
    n.state.weight_grad.fill(T(0));
    n.state.bias_grad.fill(T(0));
  }
  static void zero_node_grads(HeadNode& n) {
    n.state.weight_grad.fill(T(0));
    n.state.bias_grad.fill(T(0));
  }

  template <typename TensorFn, typename CounterFn>
  void visit_layer_values(std::size_t desc_index, TensorFn&& on_tensor,
                          CounterFn&& on_counter) const {
    for (const auto& entry : entries_) {
      if (entry.desc_index != desc_index) continue;
      if (const auto* mc = std::get_if<MultiConvNode>(&entry.node)) {
        for (const auto& s : mc->branch) {
          on_tensor(s.kernels);
          on_tensor(s.bias);
        }
      } else if (const auto* cv = std::get_if<ConvNode>(&entry.node)) {
        on_tensor(cv->state.kernels);
        on_tensor(cv->state.bias);
      } else if (const auto* bn = std::get_if<BatchNormNode>(&entry.node)) {
        for (const auto& s : bn->branch) {
          on_tensor(s.scale);
          on_tensor(s.offset);
          on_tensor(s.avg_mean);
          on_tensor(s.avg_var);
          on_counter(s.batch_count);
        }
      } else if (const auto* dn = std::get_if<DenseNode>(&entry.node)) {
        on_tensor(dn->state.weights);
        on_tensor(dn->state.bias);
      } else if (const auto* hd = std::get_if<HeadNode>(&entry.node)) {
        on_tensor(hd->state.weights);
        on_tensor(hd->state.bias);
      }
    }
  }

  template <typename TensorFn, typename CounterFn>
  void mutate_layer_values(std::size_t desc_index, TensorFn&& on_tensor, CounterFn&& on_counter) {
    for (auto& entry : entries_) {
      if (entry.desc_index != desc_index) continue;
      if (auto* mc = std::get_if<MultiConvNode>(&entry.node)) {
        for (auto& s : mc->branch) {
          on_tensor(s.kernels);
          on_tensor(s.bias);
        }
      } else if (auto* cv = std::get_if<ConvNode>(&entry.node)) {
        on_tensor(cv->state.kernels);
        on_tensor(cv->state.bias);
      } else if (auto* bn = std::get_if<BatchNormNode>(&entry.node)) {
        for (auto& s : bn->branch) {
          on_tensor(s.scale);
          on_tensor(s.offset);
          on_tensor(s.avg_mean);
          on_tensor(s.avg_var);
          on_counter(s.batch_count);
        }
      } else if (auto* dn = std::get_if<DenseNode>(&entry.node)) {
        on_tensor(dn->state.weights);
        on_tensor(dn->state.bias);
      } else if (auto* hd = std::get_if<HeadNode>(&entry.node)) {
        on_tensor(hd->state.weights);
        on_tensor(hd->state.bias);
      }
    }
  }

  ArchitectureSpec arch_;
  std::vector<LayerShape> shapes_;
  std::vector<Entry> entries_;
  Activation pending_act_ = Activation::linear;
  bool caches_valid_ = false;
};

}  // namespace mska
