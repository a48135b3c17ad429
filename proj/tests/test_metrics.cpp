#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "cueaudit/metrics.hpp"
#include "sim.hpp"
#include "support.hpp"

using namespace cueaudit;
using testing::record;

TEST_CASE("answer slot and gt choice") {
  // a larger; ab puts a first
  CHECK(answer_slot(Side::a, Ordering::ab, Polarity::positive) == Slot::first);
  CHECK(answer_slot(Side::a, Ordering::ba, Polarity::positive) == Slot::second);
  CHECK(answer_slot(Side::a, Ordering::ab, Polarity::negative) == Slot::second);
  CHECK(answer_slot(Side::b, Ordering::ba, Polarity::negative) == Slot::second);
  auto r = record(10, 20, Choice::first);
  r.numex_a = 10;
  r.numex_b = 20;
  CHECK(r.gt_choice() == Slot::second);
  CHECK(r.numex_choice() == Slot::second);
  r.numex_b = 10;
  CHECK(!r.numex_choice());
}

TEST_CASE("half of twelve prompts correct is 50%") {
  std::vector<AnalysisRecord> rs;
  for (int i = 0; i < 12; ++i) {
    const auto ord = i % 2 ? Ordering::ba : Ordering::ab;
    const auto pol = i < 6 ? Polarity::positive : Polarity::negative;
    auto r = record(5, 1, Choice::first, ord, pol);
    r.model_choice = to_choice(i < 6 ? r.gt_choice() : flip(r.gt_choice()));
    rs.push_back(r);
  }
  const auto m = pairwise_accuracy(rs);
  CHECK(*m.value == doctest::Approx(0.5));
  CHECK(m.n == 12);
  CHECK(*polarity_gap(rs) == doctest::Approx(1.0));
}

TEST_CASE("empty sets give an undefined marker, not zero") {
  std::vector<AnalysisRecord> none;
  CHECK(!pairwise_accuracy(none).value);
  CHECK(!internal_consistency(none).value);
  CHECK(!numerical_accuracy(none).value);
  CHECK(!polarity_gap(none));
  std::vector<AnalysisRecord> unknown{record(1, 2, Choice::unknown)};
  CHECK(!pairwise_accuracy(unknown).value);
  CHECK(pairwise_accuracy(unknown).excluded == 1);
}

TEST_CASE("numex ties are excluded from consistency and numerical accuracy only") {
  auto tie = record(1, 2, Choice::second);
  tie.numex_a = tie.numex_b = 7;
  auto ok = record(1, 2, Choice::second);
  ok.numex_a = 1;
  ok.numex_b = 2;
  std::vector<AnalysisRecord> rs{tie, ok};
  CHECK(pairwise_accuracy(rs).n == 2);
  const auto ic = internal_consistency(rs);
  CHECK(ic.n == 1);
  CHECK(ic.excluded == 1);
  CHECK(*ic.value == 1.0);
  CHECK(numerical_accuracy(rs).excluded == 1);

  std::vector<AnalysisRecord> single{ok};
  CHECK(*internal_consistency(single).value == 1.0);
  CHECK(*numerical_accuracy(single).value == 1.0);
  ok.numex_a = 2;
  ok.numex_b = 1;
  std::vector<AnalysisRecord> swapped{ok};
  CHECK(*numerical_accuracy(swapped).value == 0.0);
}

TEST_CASE("filtering drops unknown answers and missing numbers") {
  auto a = record(1, 2, Choice::unknown);
  auto b = record(1, 2, Choice::first);
  auto c = record(1, 2, Choice::first);
  c.numex_a = 1;
  c.numex_b = 3;
  std::vector<AnalysisRecord> rs{a, b, c};
  FilterReport rep;
  const auto kept = filter_valid(rs, &rep);
  CHECK(kept.size() == 1);
  CHECK(rep.total == 3);
  CHECK(rep.unknown_choice == 1);
  CHECK(rep.missing_numex == 1);
  CHECK(rep.kept == 1);
}

TEST_CASE("smape") {
  CHECK(*smape(100, 100) == 0);
  CHECK(*smape(100, 0) == 2);
  CHECK(*smape(100, 50) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(!smape(0, 0));
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double y = rng.normal() * 100, yh = rng.normal() * 100;
    const auto s = smape(y, yh);
    CHECK(*s >= 0);
    CHECK(*s <= 2 + 1e-12);
    CHECK(*s == doctest::Approx(*smape(yh, y)));
  }
}

TEST_CASE("cv uses the population standard deviation") {
  const std::vector<double> same{7, 7, 7}, spread{500, 1000, 1500}, skew{0, 0, 10}, zero{-1, 1};
  CHECK(*cv(same) == 0);
  CHECK(*cv(spread) == doctest::Approx(std::sqrt(2.0 / 3.0) / 2.0).epsilon(1e-12));
  CHECK(*cv(spread) == doctest::Approx(0.40825).epsilon(1e-5));
  CHECK(*cv(skew) == doctest::Approx(std::sqrt(2.0)));
  CHECK(!cv(zero));
  const std::vector<double> one{1};
  CHECK_THROWS_AS(cv(one), std::invalid_argument);
}

TEST_CASE("polarity gap") {
  std::vector<AnalysisRecord> rs;
  for (int i = 0; i < 10; ++i) {
    rs.push_back(record(2, 1, i < 8 ? Choice::first : Choice::second, Ordering::ab, Polarity::positive));
    rs.push_back(record(2, 1, i < 7 ? Choice::second : Choice::first, Ordering::ab, Polarity::negative));
  }
  CHECK(*polarity_gap(rs) == doctest::Approx(0.1));
}

TEST_CASE("template majority") {
  auto group = [](Choice x, Choice y, Choice z) {
    std::vector<AnalysisRecord> rs;
    const Choice cs[] = {x, y, z};
    for (int t = 0; t < 3; ++t) {
      auto r = record(1, 2, cs[t]);
      r.template_id = "rivers.pos" + std::to_string(t + 1);
      rs.push_back(r);
    }
    return template_majority(rs);
  };
  CHECK(group(Choice::first, Choice::first, Choice::first).full_agreement == 1);
  CHECK(group(Choice::first, Choice::first, Choice::second).two_vs_one == 1);
  const auto three = group(Choice::first, Choice::second, Choice::unknown);
  CHECK(three.full_disagreement == 1);
  CHECK(three.groups_with_unknown == 1);

  std::vector<AnalysisRecord> two{record(1, 2, Choice::first), record(1, 2, Choice::first)};
  two[1].template_id = "rivers.pos2";
  const auto skipped = template_majority(two);
  CHECK(skipped.skipped_groups == 1);
  CHECK(skipped.groups() == 0);
}

TEST_CASE("accuracy is invariant under relabelling the ordering") {
  Rng rng(9);
  std::vector<AnalysisRecord> rs, relabelled;
  for (int i = 0; i < 500; ++i) {
    const Choice c = rng.bernoulli(0.5) ? Choice::first : (rng.bernoulli(0.9) ? Choice::second : Choice::unknown);
    auto r = record(1 + rng.index(100), 200 + rng.index(100), c, rng.bernoulli(0.5) ? Ordering::ab : Ordering::ba,
                    rng.bernoulli(0.5) ? Polarity::positive : Polarity::negative);
    r.numex_a = 1 + static_cast<double>(rng.index(300));
    r.numex_b = 1 + static_cast<double>(rng.index(300));
    rs.push_back(r);
    r.ordering = flip(r.ordering);
    r.model_choice = flip(r.model_choice);
    relabelled.push_back(r);
  }
  CHECK(*pairwise_accuracy(rs).value == *pairwise_accuracy(relabelled).value);
  CHECK(*internal_consistency(rs).value == *internal_consistency(relabelled).value);
  CHECK(*numerical_accuracy(rs).value == *numerical_accuracy(relabelled).value);
  for (const auto m : {pairwise_accuracy(rs), internal_consistency(rs), numerical_accuracy(rs)}) {
    const auto v = *m.value;
    CHECK(v >= 0);
    CHECK(v <= 1);
  }
}

TEST_CASE("mock oracles") {
  const auto world = testing::small_world(24, 4);

  SUBCASE("numbers_faithful is perfectly consistent on every dataset and template") {
    const auto p = world_profile(world, MockProfile::Kind::numbers_faithful, 1.0, 17);
    const auto sim = testing::simulate(world, p, 1);
    const auto kept = filter_valid(sim.records);
    REQUIRE(kept.size() == sim.records.size());
    std::map<std::string, std::vector<AnalysisRecord>> by;
    for (const auto& r : kept) by[r.dataset + "/" + r.template_id].push_back(r);
    CHECK(by.size() == 18);
    for (const auto& [k, rs] : by) {
      INFO(k);
      CHECK(*internal_consistency(rs).value == 1.0);
      CHECK(*pairwise_accuracy(rs).value == *numerical_accuracy(rs).value);
    }
  }

  SUBCASE("position follower ignores its numbers") {
    const auto p = world_profile(world, MockProfile::Kind::position_follower, 1.0, 17);
    const auto kept = filter_valid(testing::simulate(world, p, 1).records);
    CHECK(*internal_consistency(kept).value == doctest::Approx(0.5).epsilon(0.1));
    CHECK(*pairwise_accuracy(kept).value == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(*polarity_gap(kept)) < 0.1);
  }

  SUBCASE("numerical accuracy matches a recount with corrupted beliefs") {
    auto p = world_profile(world, MockProfile::Kind::numbers_faithful, 1.0, 17);
    Rng rng(21);
    for (auto& [k, v] : p.internal_table)
      if (rng.bernoulli(0.1)) v = 1 + static_cast<double>(rng.index(100000));
    const auto kept = filter_valid(testing::simulate(world, p, 1).records);
    std::size_t hits = 0, n = 0;
    for (const auto& r : kept) {
      const double va = p.internal_table.at(r.dataset + "/" + r.pair.entity_a.entity_id);
      const double vb = p.internal_table.at(r.dataset + "/" + r.pair.entity_b.entity_id);
      if (va == vb) continue;
      ++n;
      hits += (va > vb) == (r.pair.larger == Side::a);
    }
    const auto na = numerical_accuracy(kept);
    CHECK(na.n == n);
    CHECK(*na.value == doctest::Approx(static_cast<double>(hits) / static_cast<double>(n)).epsilon(1e-15));
  }
}
