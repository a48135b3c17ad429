#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "cueaudit/gateway.hpp"

namespace cueaudit {

/// Deterministic stand-in models with a known cue dependence.
struct MockProfile {
  enum class Kind { numbers_faithful, position_follower, popularity_follower, cooccurrence_follower, uniform_noise };

  std::string name = "mock";
  Kind kind = Kind::uniform_noise;
  double obedience = 1.0;
  Slot preferred_slot = Slot::first;
  /// Private numeric beliefs, keyed "dataset/entity_id" or plain "entity_id".
  std::map<std::string, double> internal_table;
  /// Association scores for the co-occurrence follower, same keying.
  std::map<std::string, double> association;
  std::uint64_t seed = 0;
  /// Probability that a thinking-mode reply runs out of tokens.
  double thinking_overflow_rate = 0.0;

  void validate() const;
  std::optional<double> table_value(const std::string& dataset, const std::string& entity_id) const;
  std::optional<double> association_value(const std::string& dataset, const std::string& entity_id) const;
};

std::string_view to_string(MockProfile::Kind k);
MockProfile::Kind mock_kind_from_string(std::string_view s);

nlohmann::json to_json(const MockProfile& p);
MockProfile mock_profile_from_json(const nlohmann::json& j);

/// Throws ConfigError when the profile needs a table entry that is missing.
Completion mock_complete(const Job& job, const MockProfile& profile, const DecodingConfig& cfg);
Completion mock_complete(const Job& job, const MockProfile& profile);

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockProfile profile);
  std::string id() const override { return id_; }
  Completion complete(const Job& job, const DecodingConfig& cfg) override;
  const MockProfile& profile() const { return profile_; }

 private:
  MockProfile profile_;
  std::string id_;
};

}  // namespace cueaudit
