#include "csuda/pseudo_labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

namespace csuda {

double self_entropy(const Eigen::Ref<const Eigen::VectorXd>& probabilities) {
  require(probabilities.size() > 0, "self_entropy: empty vector");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    require(probabilities(i) >= 0.0, "self_entropy: negative probability at index " + std::to_string(i));
    sum += probabilities(i);
  }
  require(std::fabs(sum - 1.0) <= 1e-6, "self_entropy: probabilities sum to " + std::to_string(sum));
  double h = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i)
    if (probabilities(i) > 0.0) h -= probabilities(i) * std::log(probabilities(i));
  return std::max(0.0, h);
}

PseudoLabelSet infer_pseudo_labels(Network<float>& source_model, const DomainDataset& target) {
  require(!target.empty(), "infer_pseudo_labels: empty target set");
  require(source_model.num_classes() == target.num_classes,
          "infer_pseudo_labels: model has " + std::to_string(source_model.num_classes()) +
              " classes, target label set expects " + std::to_string(target.num_classes));

  PseudoLabelSet out;
  constexpr int kBatch = 128;
  const auto idx = all_indices(target);
  for (std::size_t start = 0; start < idx.size(); start += kBatch) {
    const std::size_t end = std::min(idx.size(), start + kBatch);
    std::vector<int> batch_idx(idx.begin() + start, idx.begin() + end);
    Matrix<float> logits = source_model.forward(pack_batch(target, batch_idx), Mode::Eval);
    Matrix<float> probs = softmax(logits);
    for (std::size_t i = 0; i < batch_idx.size(); ++i) {
      const Eigen::Index j = static_cast<Eigen::Index>(i);
      PseudoLabelRecord rec;
      rec.pseudo_label = argmax(probs.col(j));
      rec.confidence = probs(rec.pseudo_label, j);
      rec.self_entropy =
          static_cast<float>(self_entropy(probs.col(j).cast<double>().eval()));
      rec.source = LabelSource::inferred;
      out.add(target.samples[batch_idx[i]].sample_id, rec);
    }
  }
  return out;
}

std::vector<std::vector<std::string>> select_confident_priors(const PseudoLabelSet& labels,
                                                              const DomainDataset& target, int per_class) {
  require(per_class >= 1, "select_confident_priors: per_class must be >= 1");
  for (const auto& s : target.samples)
    require(labels.contains(s.sample_id), "select_confident_priors: labels do not cover '" + s.sample_id + "'");

  const int C = target.num_classes;
  // (entropy, dataset position) per class; stable ascending sort on entropy
  std::vector<std::vector<std::pair<float, std::size_t>>> buckets(C);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& rec = labels.record(i);
    buckets.at(rec.pseudo_label).push_back({rec.self_entropy, i});
  }

  std::vector<std::vector<std::string>> out(C);
  for (int c = 0; c < C; ++c) {
    auto& bucket = buckets[c];
    if (bucket.empty())
      throw std::runtime_error("select_confident_priors: no sample is pseudo-labeled as class " +
                               std::to_string(c));
    std::stable_sort(bucket.begin(), bucket.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (static_cast<int>(bucket.size()) < per_class)
      std::cerr << "warning: class " << c << " has only " << bucket.size() << " pseudo-labeled samples ("
                << per_class << " requested)\n";
    const int take = std::min<int>(per_class, static_cast<int>(bucket.size()));
    for (int i = 0; i < take; ++i) out[c].push_back(labels.ids()[bucket[i].second]);
  }
  return out;
}

void save_jsonl(const PseudoLabelSet& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& rec = labels.record(i);
    nlohmann::json j = {{"sample_id", labels.ids()[i]},
                        {"pseudo_label", rec.pseudo_label},
                        {"confidence", rec.confidence},
                        {"self_entropy", rec.self_entropy},
                        {"source", rec.source == LabelSource::inferred ? "inferred" : "refined"}};
    out << j.dump() << "\n";
  }
}

PseudoLabelSet load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  PseudoLabelSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    PseudoLabelRecord rec;
    rec.pseudo_label = j.at("pseudo_label");
    rec.confidence = j.at("confidence");
    rec.self_entropy = j.at("self_entropy");
    rec.source = j.at("source").get<std::string>() == "refined" ? LabelSource::refined : LabelSource::inferred;
    out.add(j.at("sample_id").get<std::string>(), rec);
  }
  return out;
}

double pseudo_label_noise(const PseudoLabelSet& labels, const DomainDataset& target) {
  require(!target.empty(), "pseudo_label_noise: empty target");
  std::size_t wrong = 0;
  for (const auto& s : target.samples)
    if (labels.at(s.sample_id).pseudo_label != s.label) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(target.size());
}

}  // namespace csuda
