#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "csuda/dataset.hpp"
#include "csuda/network.hpp"

namespace csuda {

enum class LabelSource { inferred, refined };

struct PseudoLabelRecord {
  int pseudo_label = 0;
  float confidence = 0.0f;    // probability assigned to pseudo_label
  float self_entropy = 0.0f;  // Shannon entropy of the predictive distribution
  LabelSource source = LabelSource::inferred;
};

/// Pseudo-labels for a target set, ordered as the target dataset. Every
/// target sample id appears exactly once.
class PseudoLabelSet {
 public:
  void add(const std::string& sample_id, const PseudoLabelRecord& rec) {
    require(index_.emplace(sample_id, ids_.size()).second, "duplicate sample_id '" + sample_id + "'");
    ids_.push_back(sample_id);
    records_.push_back(rec);
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const PseudoLabelRecord& record(std::size_t i) const { return records_.at(i); }
  PseudoLabelRecord& record(std::size_t i) { return records_.at(i); }

  const PseudoLabelRecord& at(const std::string& sample_id) const {
    auto it = index_.find(sample_id);
    require(it != index_.end(), "unknown sample_id '" + sample_id + "'");
    return records_[it->second];
  }
  bool contains(const std::string& sample_id) const { return index_.count(sample_id) > 0; }

 private:
  std::vector<std::string> ids_;
  std::vector<PseudoLabelRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Shannon entropy of a probability vector, with 0*log(0) = 0. Rejects
/// negative entries and vectors not summing to 1 within 1e-6.
double self_entropy(const Eigen::Ref<const Eigen::VectorXd>& probabilities);

/// Argmax pseudo-labels from the source model in evaluation mode (ties break
/// to the lowest class index). Confidence is the softmax probability of the
/// chosen label; entropy comes from the same distribution.
PseudoLabelSet infer_pseudo_labels(Network<float>& source_model, const DomainDataset& target);

/// Per-class lists of the N_h lowest-self-entropy sample ids (ascending
/// entropy; ties keep dataset order). Classes with fewer than N_h samples
/// return all available with a warning; a class with zero samples is an
/// error.
std::vector<std::vector<std::string>> select_confident_priors(const PseudoLabelSet& labels,
                                                              const DomainDataset& target, int per_class);

/// JSON-lines serialization: one {sample_id, pseudo_label, confidence,
/// self_entropy, source} record per line, in dataset order.
void save_jsonl(const PseudoLabelSet& labels, const std::filesystem::path& path);
PseudoLabelSet load_jsonl(const std::filesystem::path& path);

/// Fraction of pseudo-labels disagreeing with ground truth (evaluation only;
/// the pipeline itself never sees target labels).
double pseudo_label_noise(const PseudoLabelSet& labels, const DomainDataset& target);

}  // namespace csuda
