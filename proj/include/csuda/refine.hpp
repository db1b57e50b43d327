#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "csuda/dataset.hpp"
#include "csuda/network.hpp"
#include "csuda/pseudo_labels.hpp"
#include "csuda/rng.hpp"

namespace csuda {

/// Per-sample residual-label assignment: one disjoint subset of complementary
/// labels per ensemble member, each of size floor((C-1)/N_e). None contains
/// the sample's current pseudo-label.
using DRLAssignment = std::vector<std::vector<int>>;

/// Cuts a uniformly random permutation of {0..C-1}\{pseudo_label} into N_e
/// consecutive equal blocks; leftover labels are dropped for this draw.
inline DRLAssignment sample_drl(int pseudo_label, int num_classes, int num_members, Rng& rng) {
  require(num_classes - 1 >= num_members,
          "sample_drl: need C-1 >= N_e (C=" + std::to_string(num_classes) +
              ", N_e=" + std::to_string(num_members) + ")");
  std::vector<int> residual;
  residual.reserve(num_classes - 1);
  for (int c = 0; c < num_classes; ++c)
    if (c != pseudo_label) residual.push_back(c);
  // Fisher-Yates
  for (int i = static_cast<int>(residual.size()) - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(residual[i], residual[pick(rng)]);
  }
  const int block = (num_classes - 1) / num_members;
  DRLAssignment out(num_members);
  for (int k = 0; k < num_members; ++k)
    out[k].assign(residual.begin() + k * block, residual.begin() + (k + 1) * block);
  return out;
}

/// Negative-learning loss on the residual subset:
/// -(1/|drl|) * sum_{c in drl} log(1 - p_c). Probabilities are clamped to
/// <= 1 - 1e-7 before the log.
template <typename Scalar>
Scalar drl_loss(const Vector<Scalar>& probs, const std::vector<int>& drl) {
  require(!drl.empty(), "drl_loss: empty residual set");
  Scalar loss = 0;
  for (int c : drl) {
    const Scalar p = std::min(probs(c), Scalar(1) - Scalar(1e-7));
    loss -= std::log(Scalar(1) - p);
  }
  return loss / Scalar(drl.size());
}

/// Analytic gradient of drl_loss with respect to the member's logits,
/// with probs = softmax(logits).
template <typename Scalar>
Vector<Scalar> drl_loss_grad_logits(const Vector<Scalar>& probs, const std::vector<int>& drl) {
  require(!drl.empty(), "drl_loss_grad_logits: empty residual set");
  const Scalar n = Scalar(drl.size());
  Scalar weighted = 0;  // sum_c p_c / (1 - p_c)
  Vector<Scalar> g = Vector<Scalar>::Zero(probs.size());
  for (int c : drl) {
    const Scalar p = std::min(probs(c), Scalar(1) - Scalar(1e-7));
    weighted += p / (Scalar(1) - p);
    g(c) += (p / (Scalar(1) - p)) / n;
  }
  g -= Vector<Scalar>((probs * (weighted / n)));
  return g;
}

/// Ensemble of classifiers plus the per-member, per-sample logit history used
/// for late fusion (a moving average over the last `history` outputs).
struct EnsembleState {
  std::vector<Network<float>> members;
  int history = 10;  // N_a
  // buffers[k] holds up to `history` logit matrices (C x num_samples)
  std::vector<std::deque<Matrix<float>>> buffers;
  int epoch = 0;

  int num_members() const { return static_cast<int>(members.size()); }

  void push_logits(int member, const Matrix<float>& logits) {
    auto& q = buffers.at(member);
    q.push_back(logits);
    while (static_cast<int>(q.size()) > history) q.pop_front();
  }
};

/// Members start as copies of the source model with independently
/// re-initialized heads.
EnsembleState make_ensemble(const Network<float>& source_model, int num_members, int history,
                            std::uint64_t seed);

/// Late fusion for one sample: softmax of the mean of all buffered member
/// logits. Requires at least one buffered output per member.
Vector<float> fuse(const EnsembleState& ensemble, int sample_index);

struct RefineConfig {
  int epochs = 30;
  int num_members = 3;   // N_e
  int history = 10;      // N_a
  int reassign_every = 5;
  double lr = 1e-3;
  double momentum = 0.9;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

struct RefineResult {
  PseudoLabelSet labels;
  std::vector<double> noise_trace;      // per epoch, only when ground truth given
  std::vector<int> reassigned_per_round;
  int ever_reassigned = 0;
};

/// Progressive pseudo-label refinement: every epoch each member trains one
/// pass on freshly resampled disjoint residual labels, member outputs are
/// buffered and late-fused, and every `reassign_every` epochs samples whose
/// fused confidence falls below their class's mean confidence are reassigned
/// to the fused argmax. Final records carry fused confidence and entropy.
///
/// `ground_truth` is optional and used only to trace the noise rate.
RefineResult refine(EnsembleState& ensemble, const DomainDataset& target, const PseudoLabelSet& labels,
                    const RefineConfig& config, const DomainDataset* ground_truth = nullptr);

}  // namespace csuda
