#include "csuda/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

namespace csuda {

using nlohmann::json;

PhaseRecord* ExperimentManifest::find_phase(const std::string& name) {
  for (auto& p : phases)
    if (p.name == name) return &p;
  return nullptr;
}

const PhaseRecord* ExperimentManifest::find_phase(const std::string& name) const {
  for (const auto& p : phases)
    if (p.name == name) return &p;
  return nullptr;
}

bool ExperimentManifest::phase_complete(const std::string& name) const {
  const PhaseRecord* p = find_phase(name);
  return p != nullptr && (p->status == "complete" || p->status == "skipped");
}

bool ExperimentManifest::failed() const {
  for (const auto& p : phases)
    if (p.status == "failed") return true;
  return false;
}

json ExperimentManifest::to_json() const {
  json jp = json::array();
  for (const auto& p : phases)
    jp.push_back({{"name", p.name},
                  {"status", p.status},
                  {"wall_time_s", p.wall_time_s},
                  {"artifacts", p.artifacts},
                  {"metrics", p.metrics},
                  {"error", p.error}});
  return json{{"schema_version", schema_version},
              {"run_id", run_id},
              {"config", config.to_json()},
              {"phases", jp}};
}

ExperimentManifest ExperimentManifest::from_json(const json& j) {
  ExperimentManifest m;
  m.schema_version = j.at("schema_version");
  m.run_id = j.at("run_id");
  m.config = ExperimentConfig::from_json(j.at("config"));
  for (const auto& p : j.at("phases")) {
    PhaseRecord rec;
    rec.name = p.at("name");
    rec.status = p.at("status");
    rec.wall_time_s = p.at("wall_time_s");
    rec.artifacts = p.at("artifacts").get<std::map<std::string, std::string>>();
    rec.metrics = p.at("metrics");
    rec.error = p.at("error");
    m.phases.push_back(std::move(rec));
  }
  return m;
}

void ExperimentManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  out << to_json().dump(2) << "\n";
}

ExperimentManifest ExperimentManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  json j;
  in >> j;
  return from_json(j);
}

std::string make_run_id(const ExperimentConfig& config) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char ts[32];
  std::strftime(ts, sizeof(ts), "%Y%m%d-%H%M%S", &tm);

  const std::string dump = config.to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%08llx", ts, static_cast<unsigned long long>(h & 0xffffffffULL));
  return buf;
}

}  // namespace csuda
