#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "csuda/tensor.hpp"

namespace csuda {

/// A single image: Tensor with batch == 1, pixel values in [0, 1].
using Image = Tensor<float>;

struct LabeledSample {
  Image image;
  int label = 0;
  std::string sample_id;
};

struct DomainDataset {
  std::vector<LabeledSample> samples;
  std::string domain_tag;
  std::string split;  // "train" or "test"
  int num_classes = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  /// Enforces the dataset invariants: unique ids, shared image shape, pixels
  /// in [0,1], labels in [0, num_classes).
  void validate() const {
    require(!samples.empty(), "dataset '" + domain_tag + "' is empty");
    std::unordered_set<std::string> ids;
    const Image& first = samples.front().image;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      require(ids.insert(s.sample_id).second, "duplicate sample_id '" + s.sample_id + "'");
      require(s.image.same_shape(first), "image shape mismatch at sample " + std::to_string(i));
      require(s.label >= 0 && s.label < num_classes,
              "label " + std::to_string(s.label) + " out of range [0," + std::to_string(num_classes) +
                  ") at sample " + std::to_string(i) + " ('" + s.sample_id + "')");
      require(s.image.data.minCoeff() >= 0.0f && s.image.data.maxCoeff() <= 1.0f,
              "pixel out of [0,1] at sample '" + s.sample_id + "'");
    }
  }
};

/// Packs dataset samples (by index) into one batch tensor.
template <typename Scalar = float>
Tensor<Scalar> pack_batch(const DomainDataset& data, const std::vector<int>& indices) {
  require(!indices.empty(), "cannot pack an empty batch");
  const Image& first = data.samples.at(indices[0]).image;
  Tensor<Scalar> batch(static_cast<int>(indices.size()), first.channels, first.height, first.width);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Image& img = data.samples.at(indices[i]).image;
    batch.sample(static_cast<int>(i)) = img.data.template cast<Scalar>();
  }
  return batch;
}

inline std::vector<int> all_indices(const DomainDataset& data) {
  std::vector<int> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return idx;
}

/// Concatenates datasets (multi-source union). Domain tags are joined with
/// '+'; sample ids must stay globally unique.
DomainDataset concat_datasets(const std::vector<DomainDataset>& parts);

}  // namespace csuda
