#include "csuda/config.hpp"

#include <fstream>

#include "csuda/benchmark.hpp"

namespace csuda {

using nlohmann::json;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::single_source: return "single_source";
    case Scenario::multi_source: return "multi_source";
    default: return "multi_target";
  }
}

std::string to_string(AdaptMode m) { return m == AdaptMode::suda ? "suda" : "csuda"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "single_source") return Scenario::single_source;
  if (s == "multi_source") return Scenario::multi_source;
  if (s == "multi_target") return Scenario::multi_target;
  throw ConfigError("unknown scenario '" + s + "' (expected single_source|multi_source|multi_target)");
}

AdaptMode mode_from_string(const std::string& s) {
  if (s == "suda") return AdaptMode::suda;
  if (s == "csuda") return AdaptMode::csuda;
  throw ConfigError("unknown mode '" + s + "' (expected suda|csuda)");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (schema_version != 1) fail("unsupported schema_version");
  if (data.kind != "toy" && data.kind != "folder") fail("data.kind must be 'toy' or 'folder'");
  if (data.kind == "toy") {
    if (data.num_classes < 2 || data.num_classes > 16) fail("data.num_classes must be in [2,16]");
    if (data.train_per_class < 8) fail("data.train_per_class must be >= 8");
    if (data.test_per_class < 8) fail("data.test_per_class must be >= 8");
    for (const auto& d : data.source_domains)
      if (!is_builtin_domain(d)) fail("unknown source domain '" + d + "'");
    for (const auto& d : data.target_domains)
      if (!is_builtin_domain(d)) fail("unknown target domain '" + d + "'");
  }
  if (data.source_domains.empty() || data.target_domains.empty())
    fail("source_domains and target_domains must be non-empty");
  for (const auto& s : data.source_domains)
    for (const auto& t : data.target_domains)
      if (s == t) fail("domain '" + s + "' appears as both source and target");

  switch (scenario) {
    case Scenario::single_source:
      if (data.source_domains.size() != 1 || data.target_domains.size() != 1)
        fail("single_source expects exactly one source and one target domain");
      break;
    case Scenario::multi_source:
      if (data.source_domains.size() < 2) fail("multi_source expects >= 2 source domains");
      if (data.target_domains.size() != 1) fail("multi_source expects exactly one target domain");
      break;
    case Scenario::multi_target:
      if (data.source_domains.size() != 1) fail("multi_target expects exactly one source domain");
      if (data.target_domains.size() < 2) fail("multi_target expects >= 2 target domains");
      break;
  }

  if (source_train.epochs < 0 || source_train.batch_size < 1 || source_train.lr <= 0)
    fail("invalid source_train settings");
  if (refine.num_members < 2) fail("refine.num_members (N_e) must be >= 2");
  if (refine.history < 1) fail("refine.history (N_a) must be >= 1");
  if (refine.reassign_every < 1) fail("refine.reassign_every must be >= 1");
  if (refine.epochs < 0 || refine.lr <= 0 || refine.batch_size < 1) fail("invalid refine settings");
  if (data.num_classes - 1 < refine.num_members)
    fail("refine: need num_classes - 1 >= num_members for disjoint residual labels");
  if (synthesis.lambda_tv < 0) fail("synthesis.lambda_tv must be >= 0");
  if (synthesis.lambda_bn < 0) fail("synthesis.lambda_bn must be >= 0");
  if (synthesis.steps < 1) fail("synthesis.steps must be >= 1");
  if (synthesis.lr <= 0) fail("synthesis.lr must be > 0");
  if (synthesis_per_class < 1) fail("synthesis_per_class (N_h) must be >= 1");
  if (final_train.epochs < 0 || final_train.batch_size < 2 || final_train.lr <= 0)
    fail("invalid final_train settings");
  if (mode == AdaptMode::csuda && !final_train.freeze_head)
    fail("final_train.freeze_head cannot be disabled in csuda mode");
}

json ExperimentConfig::to_json() const {
  return json{
      {"schema_version", schema_version},
      {"scenario", to_string(scenario)},
      {"mode", to_string(mode)},
      {"seed", seed},
      {"data",
       {{"kind", data.kind},
        {"num_classes", data.num_classes},
        {"train_per_class", data.train_per_class},
        {"test_per_class", data.test_per_class},
        {"source_domains", data.source_domains},
        {"target_domains", data.target_domains},
        {"folder_root", data.folder_root.string()}}},
      {"source_train",
       {{"epochs", source_train.epochs},
        {"batch_size", source_train.batch_size},
        {"lr", source_train.lr},
        {"momentum", source_train.momentum}}},
      {"refine",
       {{"epochs", refine.epochs},
        {"num_members", refine.num_members},
        {"history", refine.history},
        {"reassign_every", refine.reassign_every},
        {"lr", refine.lr},
        {"momentum", refine.momentum},
        {"batch_size", refine.batch_size}}},
      {"synthesis",
       {{"lambda_tv", synthesis.lambda_tv},
        {"lambda_bn", synthesis.lambda_bn},
        {"lr", synthesis.lr},
        {"steps", synthesis.steps},
        {"init", synthesis.init == SynthesisConfig::Init::prior ? "prior" : "noise"},
        {"per_class", synthesis_per_class}}},
      {"final_train",
       {{"epochs", final_train.epochs},
        {"batch_size", final_train.batch_size},
        {"lr", final_train.lr},
        {"momentum", final_train.momentum},
        {"freeze_head", final_train.freeze_head}}},
      {"output_dir", output_dir.string()},
      {"evaluate_joint_upper_bound", evaluate_joint_upper_bound}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.schema_version = j.value("schema_version", 1);
    if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario"));
    if (j.contains("mode")) c.mode = mode_from_string(j.at("mode"));
    c.seed = j.value("seed", 0ULL);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      c.data.kind = d.value("kind", c.data.kind);
      c.data.num_classes = d.value("num_classes", c.data.num_classes);
      c.data.train_per_class = d.value("train_per_class", c.data.train_per_class);
      c.data.test_per_class = d.value("test_per_class", c.data.test_per_class);
      c.data.source_domains = d.value("source_domains", c.data.source_domains);
      c.data.target_domains = d.value("target_domains", c.data.target_domains);
      c.data.folder_root = d.value("folder_root", std::string());
    }
    if (j.contains("source_train")) {
      const auto& t = j.at("source_train");
      c.source_train.epochs = t.value("epochs", c.source_train.epochs);
      c.source_train.batch_size = t.value("batch_size", c.source_train.batch_size);
      c.source_train.lr = t.value("lr", c.source_train.lr);
      c.source_train.momentum = t.value("momentum", c.source_train.momentum);
    }
    if (j.contains("refine")) {
      const auto& r = j.at("refine");
      c.refine.epochs = r.value("epochs", c.refine.epochs);
      c.refine.num_members = r.value("num_members", c.refine.num_members);
      c.refine.history = r.value("history", c.refine.history);
      c.refine.reassign_every = r.value("reassign_every", c.refine.reassign_every);
      c.refine.lr = r.value("lr", c.refine.lr);
      c.refine.momentum = r.value("momentum", c.refine.momentum);
      c.refine.batch_size = r.value("batch_size", c.refine.batch_size);
    }
    if (j.contains("synthesis")) {
      const auto& s = j.at("synthesis");
      c.synthesis.lambda_tv = s.value("lambda_tv", c.synthesis.lambda_tv);
      c.synthesis.lambda_bn = s.value("lambda_bn", c.synthesis.lambda_bn);
      c.synthesis.lr = s.value("lr", c.synthesis.lr);
      c.synthesis.steps = s.value("steps", c.synthesis.steps);
      c.synthesis_per_class = s.value("per_class", c.synthesis_per_class);
      const std::string init = s.value("init", "prior");
      if (init == "prior")
        c.synthesis.init = SynthesisConfig::Init::prior;
      else if (init == "noise")
        c.synthesis.init = SynthesisConfig::Init::noise;
      else
        throw ConfigError("synthesis.init must be 'prior' or 'noise'");
    }
    if (j.contains("final_train")) {
      const auto& f = j.at("final_train");
      c.final_train.epochs = f.value("epochs", c.final_train.epochs);
      c.final_train.batch_size = f.value("batch_size", c.final_train.batch_size);
      c.final_train.lr = f.value("lr", c.final_train.lr);
      c.final_train.momentum = f.value("momentum", c.final_train.momentum);
      c.final_train.freeze_head = f.value("freeze_head", c.final_train.freeze_head);
    }
    c.output_dir = j.value("output_dir", std::string("runs"));
    c.evaluate_joint_upper_bound = j.value("evaluate_joint_upper_bound", false);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  // seeds propagate to every phase unless a phase overrides them later
  c.source_train.seed = c.seed;
  c.refine.seed = c.seed;
  c.synthesis.seed = c.seed;
  c.final_train.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return from_json(j);
}

}  // namespace csuda
