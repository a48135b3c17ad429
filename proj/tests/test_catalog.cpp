#include <doctest.h>

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cueaudit/catalog.hpp"
#include "cueaudit/errors.hpp"
#include "support.hpp"

using namespace cueaudit;
using testing::entity;

namespace {

EntityCatalog catalog_of(const std::vector<double>& values) {
  std::vector<EntityRecord> es;
  for (std::size_t i = 0; i < values.size(); ++i) es.push_back(entity("e" + std::to_string(i), values[i]));
  return EntityCatalog(testing::spec("rivers"), std::move(es));
}

std::size_t low_bin_size(std::size_t n) { return (n + 1) / 2; }

}  // namespace

TEST_CASE("atoms fixture loads all 118 elements") {
  const auto cat = load_catalog(testing::kFixtures / "atoms.csv", testing::spec("atoms"));
  CHECK(cat.size() == 118);
  REQUIRE(cat.find("Q1079") != nullptr);
  CHECK(cat.find("Q1079")->display_name == "Gold");
  CHECK(cat.find("Q1079")->gt_value == 79);
  CHECK(cat.find("Q1079")->embedding_key == std::optional<std::string>("gold"));
}

TEST_CASE("header-only catalog is empty, not an error") {
  std::istringstream in("entity_id,display_name,gt_value,qrank,embedding_key\n");
  CHECK(parse_catalog(in, testing::spec("rivers")).empty());
  std::istringstream nothing("");
  CHECK(parse_catalog(nothing, testing::spec("rivers")).empty());
}

TEST_CASE("non-numeric gt_value names the row") {
  std::istringstream in(
      "entity_id,display_name,gt_value,qrank,embedding_key\n"
      "Q1,Nile,6650,10,\n"
      "Q2,Danube,long,10,\n");
  try {
    parse_catalog(in, testing::spec("rivers"), "rivers.csv");
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rivers.csv: line 3") != std::string::npos);
    CHECK(msg.find("long") != std::string::npos);
  }
}

TEST_CASE("malformed catalogs") {
  const auto& s = testing::spec("rivers");
  std::istringstream bad_header("id,name\n");
  CHECK_THROWS_AS(parse_catalog(bad_header, s), LoadError);
  std::istringstream dup("entity_id,display_name,gt_value,qrank,embedding_key\nQ1,A,1,1,\nQ1,B,2,1,\n");
  CHECK_THROWS_AS(parse_catalog(dup, s), ValidationError);
  std::istringstream fields("entity_id,display_name,gt_value,qrank,embedding_key\nQ1,A,1,1\n");
  CHECK_THROWS_AS(parse_catalog(fields, s), LoadError);
  std::istringstream qrank("entity_id,display_name,gt_value,qrank,embedding_key\nQ1,A,1,-4,\n");
  CHECK_THROWS_AS(parse_catalog(qrank, s), LoadError);
}

TEST_CASE("catalog csv round trip keeps quoted names") {
  auto cat = EntityCatalog(testing::spec("countries"),
                           {entity("Q148", 1.4e9, 900, "People's Republic of China"), entity("Q17", 1.2e8, 800, "Japan, State of")});
  std::ostringstream out;
  write_catalog(out, cat);
  std::istringstream in(out.str());
  const auto back = parse_catalog(in, testing::spec("countries"));
  CHECK(back.entities() == cat.entities());
}

TEST_CASE("attribute specs need five keywords per side") {
  AttributeSpec s = testing::spec("rivers");
  CHECK_NOTHROW(s.validate());
  s.negative_keywords.pop_back();
  CHECK_THROWS_AS(s.validate(), ValidationError);
  CHECK(testing::spec("rivers").positive_keywords ==
        std::vector<std::string>{"longest", "largest", "broadest", "deep", "big"});
}

TEST_CASE("four entities give eight pairs, two per anchor, one from each bin") {
  const auto cat = catalog_of({1, 2, 3, 4});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto pairs = stratified_sample_pairs(cat, seed);
    REQUIRE(pairs.size() == 8);
    std::map<std::string, std::vector<double>> partners;
    for (const auto& p : pairs) partners[p.entity_a.entity_id].push_back(p.entity_b.gt_value);
    REQUIRE(partners.size() == 4);
    for (const auto& [anchor, vals] : partners) {
      REQUIRE(vals.size() == 2);
      CHECK(vals[0] <= 2.0);  // lower bin {1,2}
      CHECK(vals[1] >= 3.0);  // upper bin {3,4}
    }
  }
}

TEST_CASE("an anchor alone in its bin only gets the cross-bin partner") {
  // sorted e0..e3 = 1,1 | 1,2: e0 and e1 have no untied partner in the lower bin
  const auto cat = catalog_of({1, 1, 1, 2});
  SamplingReport rep;
  const auto pairs = stratified_sample_pairs(cat, 3, &rep);
  std::map<std::string, int> per_anchor;
  for (const auto& p : pairs) {
    ++per_anchor[p.entity_a.entity_id];
    CHECK(p.entity_a.gt_value != p.entity_b.gt_value);
  }
  CHECK(per_anchor["e0"] == 1);
  CHECK(per_anchor["e1"] == 1);
  CHECK(rep.skipped_draws > 0);
}

TEST_CASE("too small catalogs are rejected") {
  CHECK_THROWS_AS(stratified_sample_pairs(catalog_of({1, 2, 3}), 0), SamplingError);
  CHECK_THROWS_AS(stratified_sample_pairs(catalog_of({5, 5, 5, 5}), 0), SamplingError);
}

TEST_CASE("sampling properties over random catalogs") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + rng.index(40);
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) values.push_back(static_cast<double>(rng.index(n)));  // ties likely
    std::set<double> distinct(values.begin(), values.end());
    if (distinct.size() < 2) continue;
    const auto cat = catalog_of(values);
    const auto seed = rng.next();
    const auto pairs = stratified_sample_pairs(cat, seed);

    // determinism
    CHECK(pairs == stratified_sample_pairs(cat, seed));

    // bin balance
    const std::size_t low = low_bin_size(n);
    CHECK(low - (n - low) <= 1);

    std::map<std::string, int> per_anchor;
    for (const auto& p : pairs) {
      CHECK(p.entity_a.gt_value != p.entity_b.gt_value);
      CHECK(p.entity_a.entity_id != p.entity_b.entity_id);
      CHECK((p.larger == Side::a) == (p.entity_a.gt_value > p.entity_b.gt_value));
      ++per_anchor[p.entity_a.entity_id];
    }
    for (const auto& [id, k] : per_anchor) CHECK(k <= 2);
  }
}

TEST_CASE("top_by_popularity keeps the most popular") {
  const EntityCatalog cat(testing::spec("rivers"),
                          {entity("a", 1, 10), entity("b", 2, 30), entity("c", 3, 20), entity("d", 4, 30)});
  const auto top = cat.top_by_popularity(2);
  REQUIRE(top.size() == 2);
  CHECK(top.find("b") != nullptr);
  CHECK(top.find("d") != nullptr);
}

TEST_CASE("pair json round trip") {
  const auto p = make_pair(entity("x", 3, 1, "X"), entity("y", 9, 2, "Y"));
  CHECK(p.larger == Side::b);
  CHECK(pair_from_json(to_json(p)) == p);
  CHECK_THROWS_AS(make_pair(entity("x", 3), entity("y", 3)), ValidationError);
}
