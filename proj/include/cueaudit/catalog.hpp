#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cueaudit {

/// Per-dataset attribute metadata: unit, magnitude keywords, templates.
struct AttributeSpec {
  std::string dataset_name;
  std::string attribute_name;
  std::string canonical_unit;  // e.g. "m", "km", "count"
  std::string unit_family;     // key into the unit alias table; "" = unitless
  std::vector<std::string> positive_keywords;
  std::vector<std::string> negative_keywords;
  std::vector<std::string> template_ids;

  /// Throws ValidationError unless there are exactly five keywords per side.
  void validate() const;
};

AttributeSpec attribute_spec_from_json(const nlohmann::json& j);
std::map<std::string, AttributeSpec> attribute_specs_from_json(const nlohmann::json& j);
std::map<std::string, AttributeSpec> load_attribute_specs(const std::filesystem::path& path);

struct EntityRecord {
  std::string entity_id;
  std::string display_name;
  double gt_value = 0.0;
  std::uint64_t qrank = 0;
  std::optional<std::string> embedding_key;

  bool operator==(const EntityRecord&) const = default;
};

class EntityCatalog {
 public:
  EntityCatalog() = default;
  /// Validates every record; duplicate ids raise ValidationError.
  EntityCatalog(AttributeSpec spec, std::vector<EntityRecord> entities);

  const AttributeSpec& spec() const { return spec_; }
  const std::vector<EntityRecord>& entities() const { return entities_; }
  std::size_t size() const { return entities_.size(); }
  bool empty() const { return entities_.empty(); }
  const EntityRecord* find(const std::string& entity_id) const;

  /// The `limit` most popular entities (highest qrank, ties by id), as
  /// done before pairing on large catalogs.
  EntityCatalog top_by_popularity(std::size_t limit) const;

 private:
  AttributeSpec spec_;
  std::vector<EntityRecord> entities_;
  std::map<std::string, std::size_t> index_;
};

/// Reads the `entity_id,display_name,gt_value,qrank,embedding_key` CSV.
EntityCatalog load_catalog(const std::filesystem::path& path, const AttributeSpec& spec);
EntityCatalog parse_catalog(std::istream& in, const AttributeSpec& spec,
                            const std::string& source_name = "<stream>");
void write_catalog(std::ostream& out, const EntityCatalog& catalog);

enum class Side { a, b };

struct ComparisonPair {
  EntityRecord entity_a;
  EntityRecord entity_b;
  Side larger = Side::a;

  const EntityRecord& get(Side s) const { return s == Side::a ? entity_a : entity_b; }
  bool operator==(const ComparisonPair&) const = default;
};

ComparisonPair make_pair(const EntityRecord& a, const EntityRecord& b);

struct SamplingReport {
  std::size_t anchors = 0;
  std::size_t skipped_draws = 0;  // anchor/bin combinations with no eligible partner
};

/// Sorts by value, splits into a lower and a higher bin (median goes low),
/// and draws one partner per bin for every anchor. Equal-valued partners
/// and the anchor itself are never drawn.
std::vector<ComparisonPair> stratified_sample_pairs(const EntityCatalog& catalog,
                                                    std::uint64_t seed,
                                                    SamplingReport* report = nullptr);

nlohmann::json to_json(const EntityRecord& e);
EntityRecord entity_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ComparisonPair& p);
ComparisonPair pair_from_json(const nlohmann::json& j);

}  // namespace cueaudit
