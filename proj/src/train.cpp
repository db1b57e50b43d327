#include "csuda/train.hpp"

#include <algorithm>
#include <numeric>

#include "csuda/optim.hpp"
#include "csuda/rng.hpp"

namespace csuda {

Network<float> train_supervised(Network<float> model, const DomainDataset& data, const TrainConfig& config,
                                TrainTrace* trace) {
  require(!data.empty(), "train_supervised: empty dataset");
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    require(s.label >= 0 && s.label < model.num_classes(),
            "train_supervised: label " + std::to_string(s.label) + " out of range [0," +
                std::to_string(model.num_classes()) + ") at sample " + std::to_string(i) + " ('" +
                s.sample_id + "')");
  }
  if (config.epochs <= 0) return model;

  SgdMomentum<float> opt(model.trainable_params(true), config.lr, config.momentum);
  std::vector<int> order = all_indices(data);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng = make_rng(config.seed, {0x5F, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<int> batch_idx(order.begin() + start, order.begin() + end);
      Tensor<float> batch = pack_batch(data, batch_idx);
      std::vector<int> labels(batch_idx.size());
      for (std::size_t i = 0; i < batch_idx.size(); ++i) labels[i] = data.samples[batch_idx[i]].label;

      model.zero_grads();
      Matrix<float> logits = model.forward(batch, Mode::Train);
      epoch_loss += cross_entropy(logits, labels);
      ++batches;
      model.backward(cross_entropy_grad(logits, labels));
      opt.step();
    }
    if (trace) trace->epoch_loss.push_back(epoch_loss / std::max(1, batches));
  }
  return model;
}

double accuracy(Network<float>& model, const DomainDataset& data, std::vector<double>* per_class) {
  require(!data.empty(), "accuracy: empty dataset");
  const int C = model.num_classes();
  std::vector<int> correct(C, 0), total(C, 0);
  constexpr int kBatch = 128;
  const auto idx = all_indices(data);
  for (std::size_t start = 0; start < idx.size(); start += kBatch) {
    const std::size_t end = std::min(idx.size(), start + kBatch);
    std::vector<int> batch_idx(idx.begin() + start, idx.begin() + end);
    Tensor<float> batch = pack_batch(data, batch_idx);
    Matrix<float> logits = model.forward(batch, Mode::Eval);
    for (std::size_t i = 0; i < batch_idx.size(); ++i) {
      const int y = data.samples[batch_idx[i]].label;
      ++total[y];
      if (argmax(logits.col(static_cast<Eigen::Index>(i))) == y) ++correct[y];
    }
  }
  if (per_class) {
    per_class->assign(C, 0.0);
    for (int c = 0; c < C; ++c)
      (*per_class)[c] = total[c] > 0 ? static_cast<double>(correct[c]) / total[c] : 0.0;
  }
  const int tot = std::accumulate(total.begin(), total.end(), 0);
  const int cor = std::accumulate(correct.begin(), correct.end(), 0);
  return tot > 0 ? static_cast<double>(cor) / tot : 0.0;
}

}  // namespace csuda
