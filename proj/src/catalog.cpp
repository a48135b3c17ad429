#include "cueaudit/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cueaudit/errors.hpp"
#include "cueaudit/log.hpp"
#include "cueaudit/rng.hpp"
#include "cueaudit/text.hpp"

namespace cueaudit {

namespace {
constexpr const char* kCatalogHeader = "entity_id,display_name,gt_value,qrank,embedding_key";

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}
}  // namespace

void AttributeSpec::validate() const {
  if (dataset_name.empty()) throw ValidationError("attribute spec without dataset_name");
  if (positive_keywords.size() != 5 || negative_keywords.size() != 5) {
    throw ValidationError("attribute spec '" + dataset_name +
                          "' needs exactly 5 positive and 5 negative keywords");
  }
}

AttributeSpec attribute_spec_from_json(const nlohmann::json& j) {
  AttributeSpec s;
  s.dataset_name = j.at("dataset").get<std::string>();
  s.attribute_name = j.value("attribute", std::string{});
  s.canonical_unit = j.value("canonical_unit", std::string{"count"});
  s.unit_family = j.value("unit_family", std::string{});
  s.positive_keywords = string_list(j, "positive_keywords");
  s.negative_keywords = string_list(j, "negative_keywords");
  s.template_ids = string_list(j, "template_ids");
  s.validate();
  return s;
}

std::map<std::string, AttributeSpec> load_attribute_specs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open attribute specs: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("attribute specs " + path.string() + ": " + e.what());
  }
  return attribute_specs_from_json(j);
}

std::map<std::string, AttributeSpec> attribute_specs_from_json(const nlohmann::json& j) {
  std::map<std::string, AttributeSpec> out;
  for (const auto& item : j.at("datasets")) {
    auto spec = attribute_spec_from_json(item);
    const auto name = spec.dataset_name;
    if (!out.emplace(name, std::move(spec)).second) {
      throw ValidationError("duplicate attribute spec for dataset " + name);
    }
  }
  return out;
}

EntityCatalog::EntityCatalog(AttributeSpec spec, std::vector<EntityRecord> entities)
    : spec_(std::move(spec)), entities_(std::move(entities)) {
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    const auto& e = entities_[i];
    if (e.entity_id.empty()) throw ValidationError("entity with empty id");
    if (e.display_name.empty()) throw ValidationError("entity " + e.entity_id + " has empty display_name");
    if (!std::isfinite(e.gt_value)) throw ValidationError("entity " + e.entity_id + " has non-finite gt_value");
    if (!index_.emplace(e.entity_id, i).second) {
      throw ValidationError("duplicate entity_id '" + e.entity_id + "' in catalog " + spec_.dataset_name);
    }
  }
}

const EntityRecord* EntityCatalog::find(const std::string& entity_id) const {
  auto it = index_.find(entity_id);
  return it == index_.end() ? nullptr : &entities_[it->second];
}

EntityCatalog EntityCatalog::top_by_popularity(std::size_t limit) const {
  std::vector<EntityRecord> sorted = entities_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
    if (x.qrank != y.qrank) return x.qrank > y.qrank;
    return x.entity_id < y.entity_id;
  });
  if (sorted.size() > limit) sorted.resize(limit);
  return EntityCatalog(spec_, std::move(sorted));
}

EntityCatalog parse_catalog(std::istream& in, const AttributeSpec& spec, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) return EntityCatalog(spec, {});
  if (trim(line) != kCatalogHeader) {
    throw LoadError(source_name + ": line 1: expected header '" + std::string(kCatalogHeader) + "'");
  }
  std::vector<EntityRecord> rows;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = source_name + ": line " + std::to_string(line_no);
    std::vector<std::string> f;
    try {
      f = parse_csv_line(line);
    } catch (const std::exception& e) {
      throw LoadError(where + ": " + e.what());
    }
    if (f.size() != 5) throw LoadError(where + ": expected 5 fields, got " + std::to_string(f.size()));
    EntityRecord r;
    r.entity_id = trim(f[0]);
    r.display_name = trim(f[1]);
    {
      const auto s = trim(f[2]);
      char* end = nullptr;
      r.gt_value = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(r.gt_value)) {
        throw LoadError(where + ": gt_value '" + s + "' is not a finite number");
      }
    }
    {
      const auto s = trim(f[3]);
      if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw LoadError(where + ": qrank '" + s + "' is not a nonnegative integer");
      }
      r.qrank = std::stoull(s);
    }
    const auto key = trim(f[4]);
    if (!key.empty()) r.embedding_key = key;
    if (r.entity_id.empty()) throw LoadError(where + ": empty entity_id");
    if (r.display_name.empty()) throw LoadError(where + ": empty display_name");
    if (!seen.insert(r.entity_id).second) {
      throw ValidationError(where + ": duplicate entity_id '" + r.entity_id + "'");
    }
    rows.push_back(std::move(r));
  }
  return EntityCatalog(spec, std::move(rows));
}

EntityCatalog load_catalog(const std::filesystem::path& path, const AttributeSpec& spec) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open catalog: " + path.string());
  return parse_catalog(in, spec, path.string());
}

void write_catalog(std::ostream& out, const EntityCatalog& catalog) {
  out << kCatalogHeader << '\n';
  for (const auto& e : catalog.entities()) {
    out << csv_escape(e.entity_id) << ',' << csv_escape(e.display_name) << ','
        << format_number(e.gt_value) << ',' << e.qrank << ','
        << csv_escape(e.embedding_key.value_or("")) << '\n';
  }
}

ComparisonPair make_pair(const EntityRecord& a, const EntityRecord& b) {
  if (a.entity_id == b.entity_id) throw ValidationError("pair of identical entities: " + a.entity_id);
  if (a.gt_value == b.gt_value) {
    throw ValidationError("pair with tied gt_value: " + a.entity_id + ", " + b.entity_id);
  }
  return ComparisonPair{a, b, a.gt_value > b.gt_value ? Side::a : Side::b};
}

std::vector<ComparisonPair> stratified_sample_pairs(const EntityCatalog& catalog, std::uint64_t seed,
                                                    SamplingReport* report) {
  const auto& entities = catalog.entities();
  std::set<double> distinct;
  for (const auto& e : entities) distinct.insert(e.gt_value);
  if (entities.size() < 4 || distinct.size() < 2) {
    throw SamplingError("catalog '" + catalog.spec().dataset_name +
                        "' needs at least 4 entities and 2 distinct values to sample pairs");
  }

  std::vector<const EntityRecord*> sorted;
  sorted.reserve(entities.size());
  for (const auto& e : entities) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* x, const auto* y) {
    if (x->gt_value != y->gt_value) return x->gt_value < y->gt_value;
    return x->entity_id < y->entity_id;
  });

  const std::size_t low_size = (sorted.size() + 1) / 2;
  const std::vector<const EntityRecord*> low(sorted.begin(), sorted.begin() + low_size);
  const std::vector<const EntityRecord*> high(sorted.begin() + low_size, sorted.end());

  Rng rng(seed);
  std::vector<ComparisonPair> pairs;
  SamplingReport local;
  std::vector<const EntityRecord*> candidates;
  for (const auto* anchor : sorted) {
    ++local.anchors;
    for (const auto* bin : {&low, &high}) {
      candidates.clear();
      for (const auto* c : *bin) {
        if (c->entity_id != anchor->entity_id && c->gt_value != anchor->gt_value) candidates.push_back(c);
      }
      if (candidates.empty()) {
        ++local.skipped_draws;
        log::debug("no eligible partner for " + anchor->entity_id + " in " +
                   (bin == &low ? std::string("lower") : std::string("higher")) + " bin");
        continue;
      }
      const auto* partner = candidates[rng.index(candidates.size())];
      pairs.push_back(make_pair(*anchor, *partner));
    }
  }
  if (local.skipped_draws > 0) {
    log::info(catalog.spec().dataset_name + ": skipped " + std::to_string(local.skipped_draws) +
              " partner draws with no eligible candidate");
  }
  if (report) *report = local;
  return pairs;
}

nlohmann::json to_json(const EntityRecord& e) {
  nlohmann::json j{{"entity_id", e.entity_id},
                   {"display_name", e.display_name},
                   {"gt_value", e.gt_value},
                   {"qrank", e.qrank}};
  if (e.embedding_key) j["embedding_key"] = *e.embedding_key;
  return j;
}

EntityRecord entity_from_json(const nlohmann::json& j) {
  EntityRecord e;
  e.entity_id = j.at("entity_id").get<std::string>();
  e.display_name = j.at("display_name").get<std::string>();
  e.gt_value = j.at("gt_value").get<double>();
  e.qrank = j.at("qrank").get<std::uint64_t>();
  if (j.contains("embedding_key")) e.embedding_key = j.at("embedding_key").get<std::string>();
  return e;
}

nlohmann::json to_json(const ComparisonPair& p) {
  return {{"a", to_json(p.entity_a)}, {"b", to_json(p.entity_b)}, {"larger", p.larger == Side::a ? "a" : "b"}};
}

ComparisonPair pair_from_json(const nlohmann::json& j) {
  return make_pair(entity_from_json(j.at("a")), entity_from_json(j.at("b")));
}

}  // namespace cueaudit
