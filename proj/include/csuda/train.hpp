#pragma once

#include <cstdint>
#include <vector>

#include "csuda/dataset.hpp"
#include "csuda/network.hpp"

namespace csuda {

struct TrainConfig {
  int epochs = 15;
  int batch_size = 64;
  double lr = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TrainTrace {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

/// Supervised cross-entropy training (SGD with momentum), single-threaded and
/// seed-deterministic. Zero epochs returns the model unchanged. BN running
/// statistics are populated from the training batches.
Network<float> train_supervised(Network<float> model, const DomainDataset& data, const TrainConfig& config,
                                TrainTrace* trace = nullptr);

/// Top-1 accuracy in evaluation mode.
double accuracy(Network<float>& model, const DomainDataset& data, std::vector<double>* per_class = nullptr);

/// Mean cross-entropy of a label-index batch given logits (C x N).
template <typename Scalar>
Scalar cross_entropy(const Matrix<Scalar>& logits, const std::vector<int>& labels) {
  require(static_cast<Eigen::Index>(labels.size()) == logits.cols(), "label count mismatch");
  const Matrix<Scalar> lp = log_softmax(logits);
  Scalar loss = 0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) loss -= lp(labels[j], j);
  return loss / Scalar(logits.cols());
}

/// d(mean cross-entropy)/d(logits) = (softmax - onehot) / N.
template <typename Scalar>
Matrix<Scalar> cross_entropy_grad(const Matrix<Scalar>& logits, const std::vector<int>& labels) {
  Matrix<Scalar> g = softmax(logits);
  for (Eigen::Index j = 0; j < logits.cols(); ++j) g(labels[j], j) -= Scalar(1);
  return g / Scalar(logits.cols());
}

}  // namespace csuda
