#include <doctest.h>

#include <map>
#include <set>
#include <stdexcept>

#include "corpus.hpp"
#include "cueaudit/errors.hpp"
#include "cueaudit/parsing.hpp"
#include "cueaudit/rng.hpp"
#include "support.hpp"

using namespace cueaudit;

TEST_CASE("parser fixture corpus") {
  const auto results = testing::run_parser_corpus(testing::kFixtures / "parser");
  REQUIRE(results.size() >= 50);
  std::set<std::string> steps;
  for (const auto& r : results) {
    INFO(r.file << ":" << r.line << " got " << r.detail);
    CHECK(r.passed);
    steps.insert(r.kind + ":" + r.expected_step);
  }
  for (const char* s : {"pairwise:verbatim", "pairwise:directional", "pairwise:substring", "pairwise:fuzzy",
                        "pairwise:none", "numeric:single", "numeric:closest_to_gt", "numeric:none"}) {
    INFO(s);
    CHECK(steps.count(s) == 1);
  }
}

TEST_CASE("pairwise results relabel consistently with ordering") {
  std::ifstream in(testing::kFixtures / "parser" / "pairwise.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto text = j.at("text").get<std::string>();
    const auto a = j.at("a").get<std::string>();
    const auto b = j.at("b").get<std::string>();
    const auto pol = polarity_from_string(j.at("polarity").get<std::string>());
    INFO(text);
    const auto ab = parse_pairwise(text, a, b, Ordering::ab, pol);
    const auto ba = parse_pairwise(text, a, b, Ordering::ba, pol);
    // same names, slots swapped: the named entity is the same, its slot flips
    CHECK(ba.choice == flip(ab.choice));
    CHECK(ba.resolution_step == ab.resolution_step);
    // names passed the other way round with the ordering flipped describe the same prompt
    const auto swapped = parse_pairwise(text, b, a, Ordering::ba, pol);
    CHECK(swapped.choice == ab.choice);
    CHECK(swapped.resolution_step == ab.resolution_step);
    CHECK((ab.choice == Choice::unknown) == (ab.resolution_step == ResolutionStep::none));
    ++n;
  }
  CHECK(n > 0);
}

TEST_CASE("an earlier rung wins over later ones") {
  // verbatim beats a fuzzy near-miss of the other name
  auto r = parse_pairwise("Nile, surely not Danub", "Danube", "Nile", Ordering::ab);
  CHECK(r.resolution_step == ResolutionStep::verbatim);
  CHECK(r.choice == Choice::second);
  // directional beats substring: "Everest" alone would resolve to the first name
  r = parse_pairwise("K2 is taller than Mount Everest", "Mount Everest", "K2", Ordering::ab);
  CHECK(r.resolution_step == ResolutionStep::directional);
  CHECK(r.choice == Choice::second);
  // substring beats fuzzy
  r = parse_pairwise("China", "People's Republic of China", "Chile", Ordering::ab);
  CHECK(r.resolution_step == ResolutionStep::substring);
  CHECK(r.choice == Choice::first);
}

TEST_CASE("fuzzy threshold and margin are configurable") {
  PairwiseParseOptions loose;
  loose.fuzzy_threshold = 80;
  loose.fuzzy_margin = 5;
  CHECK(parse_pairwise("Mal", "Mali", "Malawi", Ordering::ab).choice == Choice::unknown);
  const auto r = parse_pairwise("Mal", "Mali", "Malawi", Ordering::ab, Polarity::positive,
                                DirectionalRules::defaults(), loose);
  CHECK(r.choice == Choice::first);
  CHECK(r.resolution_step == ResolutionStep::fuzzy);
  CHECK_THROWS_AS(parse_pairwise("x", "", "b", Ordering::ab), std::invalid_argument);
}

TEST_CASE("token set similarity") {
  CHECK(token_set_ratio("fuzzy wuzzy was a bear", "wuzzy fuzzy was a bear") == doctest::Approx(100));
  CHECK(token_set_ratio("Danube", "danube!") == doctest::Approx(100));
  CHECK(simple_ratio("danub", "danube") == doctest::Approx(100.0 * 10 / 11));
  CHECK(simple_ratio("abc", "xyz") == doctest::Approx(0));
  CHECK(token_set_ratio("", "x") == 0);
}

TEST_CASE("reasoning blocks are stripped") {
  CHECK(strip_reasoning("<think>a</think>b") == "b");
  CHECK(strip_reasoning("<think>a</think>b</think>c") == "c");
  CHECK(strip_reasoning("<think>never closed").empty());
  CHECK(strip_reasoning("plain") == "plain");
}

TEST_CASE("closest-to-gt selection matches a brute-force oracle") {
  const auto& spec = testing::spec("mountains");
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> values;
    std::string text = "Candidates:";
    const int k = 1 + static_cast<int>(rng.index(5));
    for (int i = 0; i < k; ++i) {
      const double v = static_cast<double>(1 + rng.index(100000));
      values.push_back(v);
      text += " " + std::to_string(static_cast<long long>(v)) + " m;";
    }
    const double gt = static_cast<double>(1 + rng.index(100000));
    const auto p = parse_numeric(text, spec, gt);
    REQUIRE(p.value);
    // never invents a value
    CHECK(std::find(values.begin(), values.end(), *p.value) != values.end());
    double best = values[0];
    for (double v : values)
      if (std::abs(v - gt) < std::abs(best - gt)) best = v;
    CHECK(*p.value == best);
    CHECK(p.candidates_seen == k);
    CHECK(p.selection_rule == (k == 1 ? SelectionRule::single : SelectionRule::closest_to_gt));
    CHECK(p.gt_changed_outcome == (best != values[0]));
  }
}

TEST_CASE("unit conversion goes through the canonical unit") {
  const auto& rivers = testing::spec("rivers");
  const auto& mountains = testing::spec("mountains");
  CHECK(*parse_numeric("1.2 km", mountains, 0).value == doctest::Approx(1200));
  CHECK(*parse_numeric("1200 m", rivers, 0).value == doctest::Approx(1.2));
  CHECK(*parse_numeric("1000 ft", mountains, 0).value == doctest::Approx(304.8));
  const auto c = extract_numbers("2,023 and 1.2 km", mountains);
  REQUIRE(c.size() == 2);
  CHECK(c[0].value == 2023);
  CHECK(c[1].value == doctest::Approx(1200));
  CHECK(parse_numeric("1.2 km", mountains, 1100).gt_changed_outcome == false);
  CHECK(parse_numeric("2023, 1.2 km", mountains, 1100).gt_changed_outcome == true);
}

TEST_CASE("custom tables") {
  const auto units = UnitTable::from_json(nlohmann::json::parse(
      R"({"families": {"mass": {"kg": 1, "t": 1000}}, "magnitudes": {"lakh": 100000}})"));
  AttributeSpec s = testing::spec("rivers");
  s.unit_family = "mass";
  s.canonical_unit = "kg";
  CHECK(*parse_numeric("3 t", s, 0, units).value == 3000);
  CHECK(*parse_numeric("2 lakh", s, 0, units).value == 200000);
  s.unit_family = "volume";
  CHECK_THROWS_AS(parse_numeric("3", s, 0, units), ConfigError);
}
