#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "csuda/dataset.hpp"
#include "csuda/network.hpp"
#include "csuda/optim.hpp"
#include "csuda/pseudo_labels.hpp"
#include "csuda/train.hpp"

namespace csuda {

/// Total-variation norm of one image: sum over pixels of
/// sqrt(d_right^2 + d_down^2), out-of-range differences taken as 0, channels
/// summed. Zero iff the image is spatially constant per channel.
template <typename Scalar>
Scalar tv_norm(const Tensor<Scalar>& image) {
  require(image.height >= 1 && image.width >= 1, "tv_norm: empty image");
  const int h = image.height, w = image.width;
  Scalar total = 0;
  for (int b = 0; b < image.batch; ++b) {
    const auto x = image.sample(b);
    for (int c = 0; c < image.channels; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
          const Scalar v = x(c, y * w + xx);
          const Scalar dr = (xx + 1 < w) ? x(c, y * w + xx + 1) - v : Scalar(0);
          const Scalar dd = (y + 1 < h) ? x(c, (y + 1) * w + xx) - v : Scalar(0);
          total += std::sqrt(dr * dr + dd * dd);
        }
      }
    }
  }
  return total;
}

/// Analytic gradient of tv_norm; adds `weight` * gradient into `grad`.
template <typename Scalar>
Scalar tv_norm_accumulate_grad(const Tensor<Scalar>& image, Scalar weight, Tensor<Scalar>& grad) {
  require(grad.same_shape(image), "tv gradient shape mismatch");
  const int h = image.height, w = image.width;
  Scalar total = 0;
  for (int b = 0; b < image.batch; ++b) {
    const auto x = image.sample(b);
    auto g = grad.sample(b);
    for (int c = 0; c < image.channels; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
          const Scalar v = x(c, y * w + xx);
          const Scalar dr = (xx + 1 < w) ? x(c, y * w + xx + 1) - v : Scalar(0);
          const Scalar dd = (y + 1 < h) ? x(c, (y + 1) * w + xx) - v : Scalar(0);
          const Scalar m = std::sqrt(dr * dr + dd * dd);
          total += m;
          if (m <= Scalar(0)) continue;
          const Scalar inv = weight / m;
          g(c, y * w + xx) -= (dr + dd) * inv;
          if (xx + 1 < w) g(c, y * w + xx + 1) += dr * inv;
          if (y + 1 < h) g(c, (y + 1) * w + xx) += dd * inv;
        }
      }
    }
  }
  return total;
}

/// Batch-statistics profile computed from one forward pass (used to plant
/// exact matching targets and to diagnose synthesis).
template <typename Scalar>
BNStatProfile<Scalar> capture_batch_stats(Network<Scalar>& model, const Tensor<Scalar>& batch) {
  require(batch.batch >= 2, "capture_batch_stats: need batch size >= 2");
  model.forward(batch, Mode::BatchStats);
  BNStatProfile<Scalar> profile;
  for (const auto& bn : model.bn_layers()) profile.layers.push_back({bn.batch_mean_, bn.batch_var_});
  return profile;
}

/// Statistics-matching regularizer against stored running statistics:
/// sum over BN layers of ||mu_batch - mu||_2 + ||var_batch - var||_2, where
/// the batch statistics are the (biased) per-channel moments of each layer's
/// input. Runs the model in batch-statistics mode; running stats are not
/// touched.
template <typename Scalar>
Scalar bn_match_loss(Network<Scalar>& model, const Tensor<Scalar>& batch, const BNStatProfile<Scalar>& profile) {
  require(batch.batch >= 2, "bn_match_loss: batch variance undefined for batch size < 2");
  require(profile.size() == model.bn_layers().size(), "bn_match_loss: profile/model layer count mismatch");
  model.forward(batch, Mode::BatchStats);
  Scalar loss = 0;
  for (std::size_t l = 0; l < profile.size(); ++l)
    loss += model.bn_layers()[l].stat_match_loss(profile.layers[l].mean, profile.layers[l].var);
  return loss;
}

struct SynthesisConfig {
  double lambda_tv = 1e-4;
  double lambda_bn = 1e-2;
  double lr = 0.1;       // Adam, cosine-annealed
  int steps = 10000;
  enum class Init { prior, noise } init = Init::prior;
  std::uint64_t seed = 0;
};

/// One optimized per-class batch with provenance and loss history.
struct SynthesisBatch {
  int label = 0;
  Tensor<float> images;                          // pixels in [0,1]
  std::vector<std::string> prior_ids;
  std::vector<std::array<float, 4>> loss_trace;  // (total, ce, tv, bn) per step
};

/// Optimizes per-class batches of confident target images against the frozen
/// source model: cross-entropy to the conditioning label plus weighted
/// total-variation and BN-statistics regularizers, Adam with cosine-annealed
/// learning rate, pixels clamped to [0,1] after every step. The source model
/// is verified unchanged (parameter hash) on return.
std::vector<SynthesisBatch> synthesize(Network<float>& source_model,
                                       const std::vector<std::vector<std::string>>& priors,
                                       const DomainDataset& target, const SynthesisConfig& config);

/// Single-batch variant; `label` is the conditioning class.
SynthesisBatch synthesize_class(Network<float>& source_model, const BNStatProfile<float>& profile,
                                Tensor<float> init_images, int label,
                                const std::vector<std::string>& prior_ids, const SynthesisConfig& config);

/// Fraction of a batch classified as its conditioning label by the model.
double batch_label_agreement(Network<float>& model, const SynthesisBatch& batch);

}  // namespace csuda
