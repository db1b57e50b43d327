#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "csuda/layers.hpp"
#include "csuda/rng.hpp"
#include "csuda/tensor.hpp"

namespace csuda {

/// Architecture description: conv+BN+ReLU blocks with stride-2 downsampling,
/// global average pooling, and a single linear head.
struct NetworkShape {
  int in_channels = 3;
  int in_height = 32;
  int in_width = 32;
  std::vector<int> block_channels = {16, 32, 64};
  int num_classes = 7;
  int kernel = 3;
  int stride = 2;

  bool operator==(const NetworkShape&) const = default;
};

inline NetworkShape toynet_shape(int num_classes) {
  NetworkShape s;
  s.num_classes = num_classes;
  return s;
}

/// Per-layer BatchNorm running statistics, detached from the owning model.
template <typename Scalar>
struct BNStatProfile {
  struct Layer {
    Vector<Scalar> mean;
    Vector<Scalar> var;
  };
  std::vector<Layer> layers;

  std::size_t size() const { return layers.size(); }
};

/// Feature extractor (conv blocks + pooling) with a linear classification
/// head. Forward is a pure function of (parameters, running stats, input) in
/// Eval mode; Train mode additionally updates BN running statistics.
template <typename Scalar>
class Network {
 public:
  Network() = default;

  explicit Network(const NetworkShape& shape, std::uint64_t seed = 0) : shape_(shape) {
    int c = shape.in_channels;
    int h = shape.in_height;
    for (int oc : shape.block_channels) {
      convs_.emplace_back(c, oc, shape.kernel, shape.stride);
      bns_.emplace_back(oc);
      relus_.emplace_back();
      c = oc;
      h = convs_.back().out_size(h);
    }
    head_ = Linear<Scalar>(c, shape.num_classes);
    init(seed);
  }

  void init(std::uint64_t seed) {
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      Rng rng = make_rng(seed, {0xC0, static_cast<std::uint64_t>(i)});
      convs_[i].init(rng);
      bns_[i] = BatchNorm2d<Scalar>(bns_[i].channels);
    }
    init_head(derive_seed(seed, {0xFC}));
  }

  /// Re-randomizes the classification head only (ensemble member diversity).
  void init_head(std::uint64_t seed) {
    Rng rng = make_rng(seed);
    head_.init(rng);
  }

  const NetworkShape& shape() const { return shape_; }
  int num_classes() const { return shape_.num_classes; }
  int num_blocks() const { return static_cast<int>(convs_.size()); }

  std::vector<BatchNorm2d<Scalar>>& bn_layers() { return bns_; }
  const std::vector<BatchNorm2d<Scalar>>& bn_layers() const { return bns_; }
  Linear<Scalar>& head() { return head_; }
  const Linear<Scalar>& head() const { return head_; }

  /// Forward pass; returns logits (num_classes x batch).
  Matrix<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    require(x.channels == shape_.in_channels && x.height == shape_.in_height && x.width == shape_.in_width,
            "input shape mismatch: expected " + std::to_string(shape_.in_channels) + "x" +
                std::to_string(shape_.in_height) + "x" + std::to_string(shape_.in_width) + ", got " +
                std::to_string(x.channels) + "x" + std::to_string(x.height) + "x" + std::to_string(x.width));
    Tensor<Scalar> t = x;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      t = convs_[i].forward(t);
      t = bns_[i].forward(t, mode);
      t = relus_[i].forward(t);
    }
    return head_.forward(pool_.forward(t));
  }

  struct BackwardOptions {
    // When set, lambda * d(stat-match)/d(bn input) is injected at every BN
    // layer on the way down (pixel-space synthesis regularizer).
    const BNStatProfile<Scalar>* bn_profile = nullptr;
    Scalar bn_weight = Scalar(0);
  };

  /// Backward pass from logit gradients; accumulates parameter gradients and
  /// returns the gradient with respect to the input tensor.
  Tensor<Scalar> backward(const Matrix<Scalar>& dlogits, const BackwardOptions& opt = {}) {
    Tensor<Scalar> dt = pool_.backward(head_.backward(dlogits));
    for (int i = num_blocks() - 1; i >= 0; --i) {
      dt = relus_[i].backward(dt);
      dt = bns_[i].backward(dt);
      if (opt.bn_profile != nullptr && opt.bn_weight != Scalar(0)) {
        const auto& target = opt.bn_profile->layers.at(i);
        dt.data += opt.bn_weight * bns_[i].stat_match_grad(target.mean, target.var);
      }
      dt = convs_[i].backward(dt);
    }
    return dt;
  }

  void zero_grads() {
    for (auto& c : convs_) c.grad_weight.setZero();
    for (auto& b : bns_) {
      b.grad_gamma.setZero();
      b.grad_beta.setZero();
    }
    head_.grad_weight.setZero();
    head_.grad_bias.setZero();
  }

  /// Gradient-trainable parameters. `include_head=false` freezes the FC head
  /// (its gradients are still computed, just never applied).
  std::vector<ParamRef<Scalar>> trainable_params(bool include_head = true) {
    std::vector<ParamRef<Scalar>> out;
    for (int i = 0; i < num_blocks(); ++i) {
      const std::string p = "block" + std::to_string(i + 1);
      out.push_back({p + ".conv.weight", &convs_[i].weight, &convs_[i].grad_weight});
      out.push_back({p + ".bn.gamma", &bns_[i].gamma, &bns_[i].grad_gamma});
      out.push_back({p + ".bn.beta", &bns_[i].beta, &bns_[i].grad_beta});
    }
    if (include_head) {
      out.push_back({"head.weight", &head_.weight, &head_.grad_weight});
      out.push_back({"head.bias", &head_.bias, &head_.grad_bias});
    }
    return out;
  }

  /// Full persistent state: trainable parameters plus BN running statistics.
  std::vector<ParamRef<Scalar>> state_tensors() {
    std::vector<ParamRef<Scalar>> out = trainable_params(true);
    for (int i = 0; i < num_blocks(); ++i) {
      const std::string p = "block" + std::to_string(i + 1);
      out.push_back({p + ".bn.running_mean", &bns_[i].running_mean, nullptr});
      out.push_back({p + ".bn.running_var", &bns_[i].running_var, nullptr});
    }
    return out;
  }

  std::string arch_id() const {
    NetworkShape canonical = toynet_shape(shape_.num_classes);
    if (shape_ == canonical) return "toynet-c" + std::to_string(shape_.num_classes);
    std::ostringstream os;
    os << "cnn-" << shape_.in_channels << "x" << shape_.in_height << "x" << shape_.in_width;
    for (int b : shape_.block_channels) os << "-" << b;
    os << "-c" << shape_.num_classes;
    return os.str();
  }

 private:
  NetworkShape shape_;
  std::vector<Conv2d<Scalar>> convs_;
  std::vector<BatchNorm2d<Scalar>> bns_;
  std::vector<Relu<Scalar>> relus_;
  GlobalAvgPool<Scalar> pool_;
  Linear<Scalar> head_;
};

/// Copies the BN running statistics out of a model. The model must carry at
/// least one BatchNorm layer; statistics are copied, never aliased.
template <typename Scalar>
BNStatProfile<Scalar> extract_bn_profile(const Network<Scalar>& model) {
  if (model.bn_layers().empty())
    throw std::invalid_argument("architecture unsupported for statistics-guided synthesis: no BatchNorm layers");
  BNStatProfile<Scalar> profile;
  for (const auto& bn : model.bn_layers())
    profile.layers.push_back({Vector<Scalar>(bn.running_mean.col(0)), Vector<Scalar>(bn.running_var.col(0))});
  return profile;
}

/// FNV-1a over the raw bytes of every state tensor; detects any parameter or
/// running-statistic mutation.
template <typename Scalar>
std::uint64_t parameter_hash(Network<Scalar>& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const unsigned char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& t : model.state_tensors())
    feed(reinterpret_cast<const unsigned char*>(t.value->data()), sizeof(Scalar) * t.value->size());
  return h;
}

/// Evaluation-mode logits for a batch of images, shaped (batch, num_classes).
/// Deterministic: BN uses running statistics and samples are processed
/// independently.
template <typename Scalar>
Matrix<Scalar> predict_logits(Network<Scalar>& model, const Tensor<Scalar>& batch) {
  return model.forward(batch, Mode::Eval).transpose();
}

}  // namespace csuda
