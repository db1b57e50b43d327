#include "csuda/refine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csuda/optim.hpp"

namespace csuda {

namespace {
constexpr std::uint64_t kDrlTag = 0xD1;
constexpr std::uint64_t kOrderTag = 0x01;
}  // namespace

EnsembleState make_ensemble(const Network<float>& source_model, int num_members, int history,
                            std::uint64_t seed) {
  require(num_members >= 2, "ensemble needs at least 2 members");
  require(history >= 1, "logit history must be >= 1");
  EnsembleState state;
  state.history = history;
  for (int k = 0; k < num_members; ++k) {
    Network<float> member = source_model;
    member.init_head(derive_seed(seed, {0xEE, static_cast<std::uint64_t>(k)}));
    state.members.push_back(std::move(member));
  }
  state.buffers.assign(num_members, {});
  return state;
}

Vector<float> fuse(const EnsembleState& ensemble, int sample_index) {
  require(!ensemble.members.empty(), "fuse: empty ensemble");
  Vector<float> acc;
  int count = 0;
  for (int k = 0; k < ensemble.num_members(); ++k) {
    const auto& q = ensemble.buffers.at(k);
    require(!q.empty(), "fuse: member " + std::to_string(k) + " has no buffered outputs yet");
    for (const auto& logits : q) {
      if (acc.size() == 0) acc = Vector<float>::Zero(logits.rows());
      acc += logits.col(sample_index);
      ++count;
    }
  }
  acc /= static_cast<float>(count);
  return Vector<float>(softmax(acc).col(0));
}

namespace {

// Fused probabilities for every sample at once: softmax of the mean of all
// buffered member logits, column per sample.
Matrix<float> fuse_all(const EnsembleState& ensemble) {
  Matrix<float> acc;
  int count = 0;
  for (int k = 0; k < ensemble.num_members(); ++k) {
    for (const auto& logits : ensemble.buffers.at(k)) {
      if (acc.size() == 0) acc = Matrix<float>::Zero(logits.rows(), logits.cols());
      acc += logits;
      ++count;
    }
  }
  require(count > 0, "fuse: no buffered outputs");
  acc /= static_cast<float>(count);
  return softmax(acc);
}

Matrix<float> eval_logits_all(Network<float>& model, const DomainDataset& data) {
  const auto idx = all_indices(data);
  Matrix<float> out(model.num_classes(), static_cast<Eigen::Index>(data.size()));
  constexpr int kBatch = 128;
  for (std::size_t start = 0; start < idx.size(); start += kBatch) {
    const std::size_t end = std::min(idx.size(), start + kBatch);
    std::vector<int> batch_idx(idx.begin() + start, idx.begin() + end);
    out.middleCols(static_cast<Eigen::Index>(start), batch_idx.size()) =
        model.forward(pack_batch(data, batch_idx), Mode::Eval);
  }
  return out;
}

}  // namespace

RefineResult refine(EnsembleState& ensemble, const DomainDataset& target, const PseudoLabelSet& labels,
                    const RefineConfig& config, const DomainDataset* ground_truth) {
  const int N = static_cast<int>(target.size());
  const int C = target.num_classes;
  require(ensemble.num_members() >= 2, "refine: ensemble needs at least 2 members");
  require(C - 1 >= ensemble.num_members(), "refine: need C-1 >= N_e");
  for (const auto& s : target.samples)
    require(labels.contains(s.sample_id), "refine: labels do not cover '" + s.sample_id + "'");

  // working state, in dataset order
  std::vector<int> current(N);
  std::vector<bool> ever_changed(N, false);
  for (int i = 0; i < N; ++i) current[i] = labels.at(target.samples[i].sample_id).pseudo_label;

  RefineResult result;
  if (config.epochs <= 0) {
    for (int i = 0; i < N; ++i)
      result.labels.add(target.samples[i].sample_id, labels.at(target.samples[i].sample_id));
    return result;
  }

  std::vector<SgdMomentum<float>> opts;
  for (auto& m : ensemble.members)
    opts.emplace_back(m.trainable_params(true), config.lr, config.momentum);

  std::vector<int> order = all_indices(target);
  Matrix<float> fused;  // (C, N) probabilities

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // fresh disjoint residual assignments, one partition per sample
    std::vector<DRLAssignment> assignment(N);
    for (int i = 0; i < N; ++i) {
      Rng rng = make_rng(config.seed,
                         {kDrlTag, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(i)});
      assignment[i] = sample_drl(current[i], C, ensemble.num_members(), rng);
    }

    Rng shuffle_rng = make_rng(config.seed, {kOrderTag, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    for (int k = 0; k < ensemble.num_members(); ++k) {
      auto& member = ensemble.members[k];
      double epoch_loss = 0.0;
      int batches = 0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        std::vector<int> batch_idx(order.begin() + start, order.begin() + end);
        Tensor<float> batch = pack_batch(target, batch_idx);

        member.zero_grads();
        Matrix<float> logits = member.forward(batch, Mode::Train);
        Matrix<float> probs = softmax(logits);
        Matrix<float> dlogits(logits.rows(), logits.cols());
        float batch_loss = 0.0f;
        for (std::size_t i = 0; i < batch_idx.size(); ++i) {
          const auto& drl = assignment[batch_idx[i]][k];
          const Vector<float> p = probs.col(static_cast<Eigen::Index>(i));
          batch_loss += drl_loss(p, drl);
          dlogits.col(static_cast<Eigen::Index>(i)) =
              drl_loss_grad_logits(p, drl) / static_cast<float>(batch_idx.size());
        }
        batch_loss /= static_cast<float>(batch_idx.size());
        epoch_loss += batch_loss;
        ++batches;
        member.backward(dlogits);
        opts[k].step();
      }
      epoch_loss /= std::max(1, batches);
      if (!std::isfinite(epoch_loss)) {
        std::ostringstream os;
        os << "refine diverged: member " << k << " mean residual-label loss is non-finite at epoch "
           << epoch;
        throw std::runtime_error(os.str());
      }
      ensemble.push_logits(k, eval_logits_all(member, target));
    }
    ensemble.epoch = epoch + 1;

    fused = fuse_all(ensemble);

    // adaptive reassignment of low-confidence labels
    if ((epoch + 1) % config.reassign_every == 0) {
      Vector<double> class_conf_sum = Vector<double>::Zero(C);
      Eigen::VectorXi class_count = Eigen::VectorXi::Zero(C);
      for (int i = 0; i < N; ++i) {
        class_conf_sum(current[i]) += fused(current[i], i);
        class_count(current[i]) += 1;
      }
      for (int i = 0; i < N; ++i) {
        const int c = current[i];
        const double threshold = class_conf_sum(c) / std::max(1, class_count(c));
        if (fused(c, i) < threshold) {
          const int reassigned = argmax(fused.col(i));
          if (reassigned != current[i]) {
            current[i] = reassigned;
            ever_changed[i] = true;
          }
        }
      }
      result.reassigned_per_round.push_back(
          static_cast<int>(std::count(ever_changed.begin(), ever_changed.end(), true)));
    }

    if (ground_truth != nullptr) {
      int wrong = 0;
      for (int i = 0; i < N; ++i)
        if (current[i] != ground_truth->samples[i].label) ++wrong;
      result.noise_trace.push_back(static_cast<double>(wrong) / N);
    }
  }

  result.ever_reassigned = static_cast<int>(std::count(ever_changed.begin(), ever_changed.end(), true));
  for (int i = 0; i < N; ++i) {
    PseudoLabelRecord rec;
    rec.pseudo_label = current[i];
    rec.confidence = fused(current[i], i);
    rec.self_entropy =
        static_cast<float>(self_entropy(fused.col(i).cast<double>().eval()));
    rec.source = ever_changed[i] ? LabelSource::refined : LabelSource::inferred;
    result.labels.add(target.samples[i].sample_id, rec);
  }
  return result;
}

}  // namespace csuda
