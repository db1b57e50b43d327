#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csuda/continual.hpp"
#include "csuda/refine.hpp"
#include "csuda/synthesis.hpp"
#include "csuda/train.hpp"

namespace csuda {

enum class Scenario { single_source, multi_source, multi_target };
enum class AdaptMode { suda, csuda };

std::string to_string(Scenario s);
std::string to_string(AdaptMode m);
Scenario scenario_from_string(const std::string& s);
AdaptMode mode_from_string(const std::string& s);

/// Raised for invalid configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataConfig {
  std::string kind = "toy";  // "toy" or "folder"
  int num_classes = 7;
  int train_per_class = 200;
  int test_per_class = 50;
  std::vector<std::string> source_domains = {"photo"};
  std::vector<std::string> target_domains = {"sketch"};
  std::filesystem::path folder_root;  // for kind == "folder": root/<domain>/<split>/<class>/*
};

struct ExperimentConfig {
  int schema_version = 1;
  Scenario scenario = Scenario::single_source;
  AdaptMode mode = AdaptMode::csuda;
  std::uint64_t seed = 0;
  DataConfig data;
  TrainConfig source_train;
  RefineConfig refine;
  SynthesisConfig synthesis;
  int synthesis_per_class = 32;  // N_h: confident priors per class
  FinalTrainConfig final_train;
  std::filesystem::path output_dir = "runs";
  bool evaluate_joint_upper_bound = false;  // toy-only oracle column

  /// Validates ranges and scenario/dataset consistency; throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace csuda
