#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cueaudit/catalog.hpp"
#include "cueaudit/cues.hpp"
#include "cueaudit/mock.hpp"

namespace cueaudit {

/// Knobs for a synthetic world: catalogs, embeddings and mock beliefs.
struct SynthOptions {
  std::vector<std::string> datasets = {"rivers", "mountains", "cities"};
  std::size_t entities = 20;
  std::uint64_t seed = 0;
  /// Correlation between log ground truth and log popularity.
  double popularity_correlation = 0.5;
  /// Correlation between log ground truth and position along the magnitude axis.
  double association_correlation = 0.5;
  /// Log-normal noise on the mock's private numbers.
  double belief_noise = 0.3;
  std::size_t dimension = 8;
};

struct SynthWorld {
  std::map<std::string, EntityCatalog> catalogs;
  EmbeddingStore embeddings;
  std::map<std::string, double> beliefs;      // "dataset/entity_id" -> value
  std::map<std::string, double> association;  // "dataset/entity_id" -> co-occurrence score
};

/// Uses the bundled attribute specs for the requested datasets.
SynthWorld generate_world(const SynthOptions& options);

/// A mock profile of the given kind reading the world's tables.
MockProfile world_profile(const SynthWorld& world, MockProfile::Kind kind, double obedience, std::uint64_t seed,
                          std::string name = {});

/// Writes catalogs/, embeddings.txt, tables/ and a runnable config.json.
void write_world(const SynthWorld& world, const SynthOptions& options, const std::filesystem::path& dir);

}  // namespace cueaudit
