#include "csuda/synthesis.hpp"

#include <random>
#include <sstream>

#include "csuda/rng.hpp"

namespace csuda {

SynthesisBatch synthesize_class(Network<float>& source_model, const BNStatProfile<float>& profile,
                                Tensor<float> init_images, int label,
                                const std::vector<std::string>& prior_ids, const SynthesisConfig& config) {
  require(config.steps >= 1, "synthesize: steps must be >= 1");
  require(config.lambda_tv >= 0 && config.lambda_bn >= 0, "synthesize: lambda weights must be >= 0");
  require(init_images.batch >= 2, "synthesize: per-class batch must hold >= 2 images");

  const std::uint64_t hash_before = parameter_hash(source_model);

  SynthesisBatch out;
  out.label = label;
  out.images = std::move(init_images);
  out.prior_ids = prior_ids;
  out.loss_trace.reserve(config.steps);

  const int N = out.images.batch;
  const std::vector<int> labels(N, label);
  Adam<float> adam(out.images.data.rows(), out.images.data.cols(), config.lr);

  for (int step = 0; step < config.steps; ++step) {
    adam.set_lr(cosine_lr(config.lr, step, config.steps));

    source_model.zero_grads();
    Matrix<float> logits = source_model.forward(out.images, Mode::BatchStats);
    const float ce = cross_entropy(logits, labels);

    float bn = 0.0f;
    for (std::size_t l = 0; l < profile.size(); ++l)
      bn += source_model.bn_layers()[l].stat_match_loss(profile.layers[l].mean, profile.layers[l].var);

    typename Network<float>::BackwardOptions opt;
    opt.bn_profile = &profile;
    opt.bn_weight = static_cast<float>(config.lambda_bn);
    Tensor<float> grad = source_model.backward(cross_entropy_grad(logits, labels), opt);

    const float tv =
        tv_norm_accumulate_grad(out.images, static_cast<float>(config.lambda_tv) / N, grad) / N;

    const float total = ce + static_cast<float>(config.lambda_tv) * tv + static_cast<float>(config.lambda_bn) * bn;
    if (!std::isfinite(total)) {
      std::ostringstream os;
      os << "synthesis diverged at step " << step << " (class " << label << "): total=" << total
         << " ce=" << ce << " tv=" << tv << " bn=" << bn;
      throw std::runtime_error(os.str());
    }
    out.loss_trace.push_back({total, ce, tv, bn});

    adam.step(out.images.data, grad.data);
    out.images.data = out.images.data.array().min(1.0f).max(0.0f).matrix();
  }

  if (parameter_hash(source_model) != hash_before)
    throw std::runtime_error("synthesize: frozen source model was mutated");
  return out;
}

std::vector<SynthesisBatch> synthesize(Network<float>& source_model,
                                       const std::vector<std::vector<std::string>>& priors,
                                       const DomainDataset& target, const SynthesisConfig& config) {
  const BNStatProfile<float> profile = extract_bn_profile(source_model);

  // sample_id -> dataset index
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < target.size(); ++i) index.emplace(target.samples[i].sample_id, static_cast<int>(i));

  std::vector<SynthesisBatch> batches;
  for (int c = 0; c < static_cast<int>(priors.size()); ++c) {
    require(!priors[c].empty(), "synthesize: class " + std::to_string(c) + " has no prior samples");
    const int n = static_cast<int>(priors[c].size());
    const Image& first = target.samples.front().image;
    Tensor<float> init(n, first.channels, first.height, first.width);

    if (config.init == SynthesisConfig::Init::prior) {
      for (int i = 0; i < n; ++i) {
        auto it = index.find(priors[c][i]);
        require(it != index.end(), "synthesize: unknown prior sample '" + priors[c][i] + "'");
        init.sample(i) = target.samples[it->second].image.data;
      }
    } else {
      Rng rng = make_rng(config.seed, {0x55, static_cast<std::uint64_t>(c)});
      std::uniform_real_distribution<float> uni(0.0f, 1.0f);
      for (Eigen::Index p = 0; p < init.data.size(); ++p) init.data(p) = uni(rng);
    }

    batches.push_back(synthesize_class(source_model, profile, std::move(init), c, priors[c], config));
  }
  return batches;
}

double batch_label_agreement(Network<float>& model, const SynthesisBatch& batch) {
  Matrix<float> logits = model.forward(batch.images, Mode::Eval);
  int hits = 0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j)
    if (argmax(logits.col(j)) == batch.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(logits.cols());
}

}  // namespace csuda
