#include "cueaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "cueaudit/defaults.hpp"
#include "cueaudit/rng.hpp"
#include "cueaudit/text.hpp"

namespace cueaudit {

namespace {

constexpr const char* kSyllables[] = {"ba", "ka", "lo", "mi", "nu", "re", "sa", "to", "vi", "ze",
                                      "dra", "fen", "gor", "hal", "jun", "pel", "quo", "tis", "wex", "yor"};

std::string pseudo_word(Rng& rng) {
  const std::size_t n = 3 + rng.index(2);
  std::string w;
  for (std::size_t i = 0; i < n; ++i) w += kSyllables[rng.index(std::size(kSyllables))];
  w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

// Names no other name contains, so every answer matches exactly one entity.
std::vector<std::string> unique_names(Rng& rng, std::size_t n, std::set<std::string>& taken) {
  std::vector<std::string> out;
  while (out.size() < n) {
    const std::string w = pseudo_word(rng);
    const std::string lw = to_lower(w);
    bool clash = false;
    for (const auto& t : taken) {
      if (t.find(lw) != std::string::npos || lw.find(t) != std::string::npos) {
        clash = true;
        break;
      }
    }
    if (clash) continue;
    taken.insert(lw);
    out.push_back(w);
  }
  return out;
}

// Rank-based standard scores of log values.
std::vector<double> zscores(const std::vector<double>& values) {
  std::vector<double> lv;
  for (double v : values) lv.push_back(std::log(v));
  const double mean = std::accumulate(lv.begin(), lv.end(), 0.0) / static_cast<double>(lv.size());
  double ss = 0.0;
  for (double x : lv) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(lv.size()));
  for (auto& x : lv) x = sd > 0 ? (x - mean) / sd : 0.0;
  return lv;
}

}  // namespace

SynthWorld generate_world(const SynthOptions& o) {
  if (o.entities < 4) throw ConfigError("a synthetic catalog needs at least 4 entities");
  if (o.dimension < 2) throw ConfigError("embedding dimension must be at least 2");
  SynthWorld world;
  world.embeddings = EmbeddingStore(o.dimension);
  Rng rng(derive_seed(o.seed, "synth"));
  std::set<std::string> taken;

  // Keywords: positive ones near +axis, negative ones near -axis (axis = dim 0).
  std::set<std::string> keywords_done;
  auto add_keyword = [&](const std::string& w, double sign) {
    if (!keywords_done.insert(to_lower(w)).second) return;
    std::vector<double> v(o.dimension);
    for (auto& x : v) x = 0.1 * rng.normal();
    v[0] = sign;
    world.embeddings.add(w, v);
    taken.insert(to_lower(w));
  };

  const double rho_p = std::clamp(o.popularity_correlation, -1.0, 1.0);
  const double rho_c = std::clamp(o.association_correlation, -1.0, 1.0);
  for (const auto& ds : o.datasets) {
    const auto it = builtin_attribute_specs().find(ds);
    if (it == builtin_attribute_specs().end()) throw ConfigError("no bundled attribute spec for dataset " + ds);
    const AttributeSpec& spec = it->second;
    for (const auto& w : spec.positive_keywords) add_keyword(w, 1.0);
    for (const auto& w : spec.negative_keywords) add_keyword(w, -1.0);

    const auto names = unique_names(rng, o.entities, taken);
    std::set<double> used_values;
    std::vector<double> gts;
    while (gts.size() < o.entities) {
      const double v = std::round(std::exp(std::log(10.0) + rng.uniform() * std::log(1e5)));
      if (used_values.insert(v).second) gts.push_back(v);
    }
    const auto z = zscores(gts);
    std::vector<EntityRecord> entities;
    for (std::size_t i = 0; i < o.entities; ++i) {
      EntityRecord e;
      e.entity_id = ds + "_" + std::to_string(i + 1);
      e.display_name = names[i];
      e.gt_value = gts[i];
      const double pop = rho_p * z[i] + std::sqrt(1.0 - rho_p * rho_p) * rng.normal();
      e.qrank = static_cast<std::uint64_t>(std::llround(std::exp(10.0 + 1.5 * pop)));
      e.embedding_key = to_lower(names[i]);

      const double s = rho_c * z[i] + std::sqrt(1.0 - rho_c * rho_c) * rng.normal();
      std::vector<double> vec(o.dimension);
      for (auto& x : vec) x = rng.normal();
      vec[0] = s;
      world.embeddings.add(*e.embedding_key, vec);

      const double belief = std::max(1.0, std::round(e.gt_value * std::exp(o.belief_noise * rng.normal())));
      world.beliefs[ds + "/" + e.entity_id] = belief;
      entities.push_back(std::move(e));
    }
    EntityCatalog catalog(spec, std::move(entities));
    const MagnitudeAxis axis = magnitude_axis(spec, world.embeddings);
    for (const auto& e : catalog.entities())
      if (const auto sc = cooccurrence_score(e, axis.axis, world.embeddings))
        world.association[ds + "/" + e.entity_id] = *sc;
    world.catalogs.emplace(ds, std::move(catalog));
  }
  return world;
}

MockProfile world_profile(const SynthWorld& world, MockProfile::Kind kind, double obedience, std::uint64_t seed,
                          std::string name) {
  MockProfile p;
  p.name = name.empty() ? std::string(to_string(kind)) : std::move(name);
  p.kind = kind;
  p.obedience = obedience;
  p.internal_table = world.beliefs;
  p.association = world.association;
  p.seed = seed;
  p.validate();
  return p;
}

namespace {
void write_table(const std::map<std::string, double>& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "key,value\n";
  for (const auto& [k, v] : table) out << csv_escape(k) << ',' << format_number(v) << '\n';
}
}  // namespace

void write_world(const SynthWorld& world, const SynthOptions& options, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "catalogs");
  fs::create_directories(dir / "tables");
  nlohmann::json datasets = nlohmann::json::array();
  for (const auto& [name, catalog] : world.catalogs) {
    std::ofstream out(dir / "catalogs" / (name + ".csv"), std::ios::binary);
    write_catalog(out, catalog);
    datasets.push_back({{"name", name}, {"catalog", "catalogs/" + name + ".csv"}});
  }
  {
    std::ofstream out(dir / "embeddings.txt", std::ios::binary);
    world.embeddings.write(out);
  }
  write_table(world.beliefs, dir / "tables" / "beliefs.csv");
  write_table(world.association, dir / "tables" / "association.csv");

  struct Spec {
    const char* kind;
    double obedience;
  };
  const Spec specs[] = {{"numbers_faithful", 1.0},
                        {"position_follower", 0.8},
                        {"popularity_follower", 0.8},
                        {"cooccurrence_follower", 0.8},
                        {"uniform_noise", 1.0}};
  nlohmann::json models = nlohmann::json::array();
  for (const auto& s : specs) {
    models.push_back({{"name", s.kind},
                      {"backend", "mock"},
                      {"mock",
                       {{"kind", s.kind},
                        {"obedience", s.obedience},
                        {"internal_table_csv", "tables/beliefs.csv"},
                        {"association_csv", "tables/association.csv"}}}});
  }
  const nlohmann::json config{{"run_id", "synthetic"},
                              {"output_dir", "runs"},
                              {"cache_dir", "cache"},
                              {"seed", options.seed},
                              {"mode", "plain"},
                              {"embeddings", "embeddings.txt"},
                              {"datasets", datasets},
                              {"models", models},
                              {"bootstrap", {{"n_resamples", 200}}}};
  std::ofstream out(dir / "config.json", std::ios::binary);
  out << config.dump(2) << '\n';
}

}  // namespace cueaudit
