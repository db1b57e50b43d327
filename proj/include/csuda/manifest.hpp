#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csuda/config.hpp"

namespace csuda {

struct PhaseRecord {
  std::string name;
  std::string status = "pending";  // pending | complete | skipped | failed
  double wall_time_s = 0.0;
  std::map<std::string, std::string> artifacts;  // logical name -> path
  nlohmann::json metrics = nlohmann::json::object();
  std::string error;
};

/// Append-only run record: config snapshot, phase log, final metrics. Written
/// to <run_dir>/manifest.json after every phase so a run can be resumed.
struct ExperimentManifest {
  int schema_version = 1;
  std::string run_id;
  ExperimentConfig config;
  std::vector<PhaseRecord> phases;

  PhaseRecord* find_phase(const std::string& name);
  const PhaseRecord* find_phase(const std::string& name) const;
  bool phase_complete(const std::string& name) const;
  bool failed() const;

  nlohmann::json to_json() const;
  static ExperimentManifest from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  static ExperimentManifest load(const std::filesystem::path& path);
};

/// run id = UTC timestamp + short config hash (content-addressed suffix).
std::string make_run_id(const ExperimentConfig& config);

}  // namespace csuda
