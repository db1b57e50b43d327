#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csuda/dataset.hpp"
#include "csuda/network.hpp"
#include "csuda/train.hpp"

namespace csuda {

/// Training set for the final model: real target images with refined
/// pseudo-labels, optionally mixed with synthesized source-style images and
/// their conditioning labels. Batches draw half from each part, with
/// replacement on the smaller part.
struct MixedTrainingSet {
  Tensor<float> target_images;
  std::vector<int> target_labels;
  Tensor<float> synthetic_images;   // batch == 0 when absent (SUDA mode)
  std::vector<int> synthetic_labels;

  bool has_synthetic() const { return synthetic_images.batch > 0; }
};

struct FinalTrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double lr = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool freeze_head = true;
};

/// Trains the final model starting from the source model: the linear head is
/// frozen (bit-identical before/after) while the feature extractor trains
/// with cross-entropy on mixed batches.
Network<float> train_final(const Network<float>& source_model, const MixedTrainingSet& data,
                           const FinalTrainConfig& config);

struct EvalReport {
  double target_accuracy = 0.0;
  double source_accuracy = 0.0;
  std::optional<double> source_accuracy_baseline;  // source model on source test
  std::optional<double> forgetting;                // baseline - source_accuracy
  std::vector<double> per_class_target;
  std::vector<double> per_class_source;
  std::string target_tag;
  std::string source_tag;
};

/// Top-1 accuracies of a model on target and source test sets. Forgetting is
/// reported only when the source baseline is known; it is never silently
/// zero.
EvalReport evaluate(Network<float>& model, const DomainDataset& target_test, const DomainDataset& source_test,
                    std::optional<double> source_baseline);

/// Plain-text accuracy grid (Sc / Tg / Tg+SynSc columns) for a set of runs.
struct AccuracyRow {
  std::string scenario;                        // e.g. "photo->sketch"
  std::optional<double> source_only_tg;        // source model on target test
  std::optional<double> suda_tg, suda_sc;
  std::optional<double> csuda_tg, csuda_sc;
  std::optional<double> joint_tg, joint_sc;    // real-source upper bound
};

std::string format_accuracy_table(const std::vector<AccuracyRow>& rows);
std::string format_accuracy_csv(const std::vector<AccuracyRow>& rows);

}  // namespace csuda
