#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cueaudit/bos.hpp"
#include "cueaudit/catalog.hpp"
#include "cueaudit/gateway.hpp"
#include "cueaudit/mock.hpp"
#include "cueaudit/parsing.hpp"
#include "cueaudit/pipeline.hpp"
#include "cueaudit/prompting.hpp"

namespace cueaudit {

struct DatasetConfig {
  std::string name;
  std::filesystem::path catalog;
  std::optional<std::size_t> max_entities;  // keep the most popular ones
};

struct ModelConfig {
  std::string name;
  std::string backend;  // "mock" or "http"
  std::optional<MockProfile> mock;
  std::optional<HttpBackendConfig> http;
};

/// Run configuration (JSON). Relative paths resolve against the config file.
struct RunConfig {
  std::string run_id = "run";
  std::filesystem::path output_dir = "runs";
  std::filesystem::path cache_dir = "cache";
  std::uint64_t seed = 0;
  Mode mode = Mode::plain;
  std::string thinking_marker = std::string(kDefaultThinkingMarker);
  std::optional<std::filesystem::path> templates;
  std::optional<std::filesystem::path> attributes;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> units;
  std::optional<std::filesystem::path> directional_rules;
  std::vector<DatasetConfig> datasets;
  std::vector<ModelConfig> models;
  double temperature = 0.0;
  GatewayOptions gateway;
  BootstrapOptions bootstrap;

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);
  /// Canonical form recorded in the manifest.
  nlohmann::json to_json() const;
};

inline const std::vector<std::string> kStages = {"sample", "render", "query", "parse", "analyze"};

/// Stage-wise execution with a manifest under <output_dir>/<run_id>.
class Run {
 public:
  /// Loads and validates every resource; throws before any backend call.
  explicit Run(RunConfig config);

  void sample();
  void render();
  void query();
  void parse();
  void analyze();
  void probe_swap();
  /// sample through analyze.
  void run_all();

  /// Path of a report table; throws with the stage to run if it is missing.
  std::filesystem::path report_path(const std::string& table) const;

  const RunConfig& config() const { return config_; }
  std::filesystem::path run_dir() const { return run_dir_; }
  const nlohmann::json& manifest() const { return manifest_; }
  /// Backend calls made by this process, summed over models.
  std::size_t backend_calls() const { return backend_calls_; }
  std::size_t stages_skipped() const { return stages_skipped_; }

 private:
  struct Resources;
  RunConfig config_;
  std::shared_ptr<const Resources> res_;
  std::filesystem::path run_dir_;
  nlohmann::json manifest_;
  std::size_t backend_calls_ = 0;
  std::size_t stages_skipped_ = 0;

  bool up_to_date(const std::string& stage, const std::string& input_hash) const;
  void finish_stage(const std::string& stage, const std::string& input_hash,
                    const std::vector<std::filesystem::path>& outputs);
  std::string output_hash(const std::string& stage) const;
  void require_stage(const std::string& stage) const;
  void save_manifest() const;
  std::unique_ptr<Backend> make_backend(const ModelConfig& m) const;
};

/// Hash of a file's bytes, hex encoded; empty if the file does not exist.
std::string file_hash(const std::filesystem::path& path);

}  // namespace cueaudit
