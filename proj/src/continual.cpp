#include "csuda/continual.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "csuda/optim.hpp"
#include "csuda/rng.hpp"

namespace csuda {

namespace {

Tensor<float> gather(const Tensor<float>& pool, const std::vector<int>& indices) {
  Tensor<float> out(static_cast<int>(indices.size()), pool.channels, pool.height, pool.width);
  for (std::size_t i = 0; i < indices.size(); ++i)
    out.sample(static_cast<int>(i)) = pool.sample(indices[i]);
  return out;
}

}  // namespace

Network<float> train_final(const Network<float>& source_model, const MixedTrainingSet& data,
                           const FinalTrainConfig& config) {
  require(data.target_images.batch > 0, "train_final: target part is empty");
  require(static_cast<std::size_t>(data.target_images.batch) == data.target_labels.size(),
          "train_final: target label count mismatch");
  if (data.has_synthetic())
    require(static_cast<std::size_t>(data.synthetic_images.batch) == data.synthetic_labels.size(),
            "train_final: synthetic label count mismatch");

  Network<float> model = source_model;
  if (config.epochs <= 0) return model;

  SgdMomentum<float> opt(model.trainable_params(/*include_head=*/!config.freeze_head), config.lr,
                         config.momentum);

  const int half = std::max(1, config.batch_size / 2);
  std::vector<int> target_order(data.target_images.batch);
  for (std::size_t i = 0; i < target_order.size(); ++i) target_order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng = make_rng(config.seed, {0xF1, static_cast<std::uint64_t>(epoch)});
    std::shuffle(target_order.begin(), target_order.end(), rng);
    std::uniform_int_distribution<int> synth_pick(0, std::max(0, data.synthetic_images.batch - 1));

    const int step_size = data.has_synthetic() ? half : config.batch_size;
    for (std::size_t start = 0; start < target_order.size(); start += step_size) {
      const std::size_t end = std::min(target_order.size(), start + step_size);
      std::vector<int> tgt_idx(target_order.begin() + start, target_order.begin() + end);

      Tensor<float> batch;
      std::vector<int> labels;
      if (data.has_synthetic()) {
        // 50/50 mix, synthetic half drawn with replacement
        std::vector<int> syn_idx(tgt_idx.size());
        for (auto& s : syn_idx) s = synth_pick(rng);
        Tensor<float> tgt = gather(data.target_images, tgt_idx);
        Tensor<float> syn = gather(data.synthetic_images, syn_idx);
        batch = Tensor<float>(tgt.batch + syn.batch, tgt.channels, tgt.height, tgt.width);
        batch.data << tgt.data, syn.data;
        for (int i : tgt_idx) labels.push_back(data.target_labels[i]);
        for (int i : syn_idx) labels.push_back(data.synthetic_labels[i]);
      } else {
        batch = gather(data.target_images, tgt_idx);
        for (int i : tgt_idx) labels.push_back(data.target_labels[i]);
      }

      model.zero_grads();
      Matrix<float> logits = model.forward(batch, Mode::Train);
      model.backward(cross_entropy_grad(logits, labels));
      opt.step();
    }
  }
  return model;
}

EvalReport evaluate(Network<float>& model, const DomainDataset& target_test, const DomainDataset& source_test,
                    std::optional<double> source_baseline) {
  require(!target_test.empty() && !source_test.empty(), "evaluate: test sets must be non-empty");
  EvalReport report;
  report.target_tag = target_test.domain_tag;
  report.source_tag = source_test.domain_tag;
  report.target_accuracy = accuracy(model, target_test, &report.per_class_target);
  report.source_accuracy = accuracy(model, source_test, &report.per_class_source);
  report.source_accuracy_baseline = source_baseline;
  if (source_baseline.has_value()) report.forgetting = *source_baseline - report.source_accuracy;
  return report;
}

namespace {

std::string fmt_pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%6.2f", 100.0 * v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v.has_value() ? fmt_pct(*v) : "     -";
}

}  // namespace

std::string format_accuracy_table(const std::vector<AccuracyRow>& rows) {
  std::ostringstream os;
  os << "| scenario             |  Sc->Tg |   Tg    |   Sc*   | Tg+SynSc|   Sc*   |  Tg+Sc  |   Sc*   |\n";
  os << "|                      |         |      SUDA         |      C-SUDA       |     Baseline      |\n";
  os << "|----------------------|---------|---------|---------|---------|---------|---------|---------|\n";
  for (const auto& r : rows) {
    os << "| " << r.scenario;
    for (std::size_t i = r.scenario.size(); i < 21; ++i) os << ' ';
    os << "|  " << fmt_opt(r.source_only_tg) << " |  " << fmt_opt(r.suda_tg) << " |  " << fmt_opt(r.suda_sc)
       << " |  " << fmt_opt(r.csuda_tg) << " |  " << fmt_opt(r.csuda_sc) << " |  " << fmt_opt(r.joint_tg)
       << " |  " << fmt_opt(r.joint_sc) << " |\n";
  }
  return os.str();
}

std::string format_accuracy_csv(const std::vector<AccuracyRow>& rows) {
  std::ostringstream os;
  os << "scenario,source_only_target,suda_target,suda_source,csuda_target,csuda_source,joint_target,joint_source\n";
  for (const auto& r : rows) {
    auto cell = [&os](const std::optional<double>& v) {
      if (v) os << *v;
    };
    os << r.scenario << ',';
    cell(r.source_only_tg);
    os << ',';
    cell(r.suda_tg);
    os << ',';
    cell(r.suda_sc);
    os << ',';
    cell(r.csuda_tg);
    os << ',';
    cell(r.csuda_sc);
    os << ',';
    cell(r.joint_tg);
    os << ',';
    cell(r.joint_sc);
    os << '\n';
  }
  return os.str();
}

}  // namespace csuda
