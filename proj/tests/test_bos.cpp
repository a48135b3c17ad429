#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "cueaudit/bos.hpp"
#include "support.hpp"

using namespace cueaudit;

namespace {

// Record in cell (P,O,C,I) of a template; `correct` sets the model's answer.
AnnotatedRecord cell_record(int cell, bool correct, const std::string& tmpl = "rivers.pos1",
                            const std::string& dataset = "rivers", int id = 0) {
  AnnotatedRecord a;
  a.record = testing::record(2, 1, Choice::first);
  a.record.dataset = dataset;
  a.record.template_id = tmpl;
  a.record.pair.entity_a.entity_id = "x" + std::to_string(id);
  a.record.model_choice = correct ? to_choice(a.record.gt_choice()) : flip(to_choice(a.record.gt_choice()));
  a.features.P = (cell & 8) != 0;
  a.features.O = (cell & 4) != 0;
  a.features.C = (cell & 2) != 0;
  a.features.I = (cell & 1) != 0;
  return a;
}

// n1 records with F=1 (c1 correct) and n0 with F=0 (c0 correct) for feature P.
void add_block(std::vector<AnnotatedRecord>& out, const std::string& tmpl, int n1, int c1, int n0, int c0) {
  for (int i = 0; i < n1; ++i) out.push_back(cell_record(8, i < c1, tmpl));
  for (int i = 0; i < n0; ++i) out.push_back(cell_record(0, i < c0, tmpl));
}

}  // namespace

TEST_CASE("equal cells are all retained") {
  std::vector<AnnotatedRecord> rs;
  for (int c = 0; c < 16; ++c)
    for (int k = 0; k < 3; ++k) rs.push_back(cell_record(c, k == 0, "rivers.pos1", "rivers", c * 10 + k));
  const auto t = build_bos(rs, 1);
  REQUIRE(t.groups.size() == 1);
  CHECK(t.retained() == 48);
  CHECK(t.total() == 48);
  CHECK(t.groups[0].minority_count == 3);
}

TEST_CASE("cells of five with one of two keep thirty-two") {
  std::vector<AnnotatedRecord> rs;
  for (int c = 0; c < 16; ++c)
    for (int k = 0; k < (c == 9 ? 2 : 5); ++k) rs.push_back(cell_record(c, true, "rivers.pos1", "rivers", c * 10 + k));
  rs.push_back(cell_record(0, true));
  rs.back().features.C.reset();
  const auto t = build_bos(rs, 7);
  const auto& g = t.groups[0];
  CHECK(g.minority_count == 2);
  CHECK(g.retained.size() == 32);
  CHECK(g.total == 15 * 5 + 2 + 1);
  CHECK(g.undefined_features == 1);
  // sampled without replacement
  std::set<std::string> ids;
  for (const auto& r : g.retained) ids.insert(r.record.pair.entity_a.entity_id);
  CHECK(ids.size() == 32);
  // deterministic given the seed
  const auto again = build_bos(rs, 7);
  for (std::size_t i = 0; i < 32; ++i)
    CHECK(again.groups[0].retained[i].record.pair.entity_a.entity_id == g.retained[i].record.pair.entity_a.entity_id);
}

TEST_CASE("an empty cell makes the template unavailable") {
  std::vector<AnnotatedRecord> rs;
  for (int c = 0; c < 15; ++c) rs.push_back(cell_record(c, true));
  rs.push_back(cell_record(0, true, "rivers.pos2"));
  const auto t = build_bos(rs, 1);
  REQUIRE(t.groups.size() == 2);
  CHECK(!t.groups[0].available);
  CHECK(t.retained() == 0);
  CHECK(t.total() == 16);
}

TEST_CASE("risk ratio and e-value") {
  std::vector<AnnotatedRecord> rs;
  add_block(rs, "t", 10, 6, 10, 3);
  CHECK(*risk_ratio(rs, Feature::P) == doctest::Approx(2.0));
  std::vector<AnnotatedRecord> same;
  add_block(same, "t", 10, 4, 20, 8);
  CHECK(*risk_ratio(same, Feature::P) == doctest::Approx(1.0));
  std::vector<AnnotatedRecord> zero;
  add_block(zero, "t", 10, 4, 10, 0);
  CHECK(!risk_ratio(zero, Feature::P));
  std::vector<AnnotatedRecord> one_sided;
  add_block(one_sided, "t", 10, 4, 0, 0);
  CHECK(!risk_ratio(one_sided, Feature::P));

  CHECK(e_value(1) == 1);
  CHECK(e_value(1.5) == doctest::Approx(1.5 + std::sqrt(0.75)));
  CHECK(e_value(4) == doctest::Approx(4 + std::sqrt(12.0)));
  CHECK(e_value(4) == doctest::Approx(7.464).epsilon(1e-4));
  CHECK_THROWS_AS(e_value(0.5), std::invalid_argument);
  CHECK(*fold_direction(0.25) == 4);
  CHECK(*fold_direction(4) == 4);
  CHECK(!fold_direction(0));
}

TEST_CASE("position is aligned with polarity, pooled, then folded") {
  std::vector<BlockCounts> blocks{{10, 2, 10, 8}};
  CHECK(*combine_blocks(blocks, Feature::O) == doctest::Approx(4));
  CHECK(*combine_blocks(blocks, Feature::P) == doctest::Approx(0.25));
  std::vector<BlockCounts> mixed{{10, 8, 10, 4}, {30, 9, 30, 9}, {20, 3, 20, 6}};
  // pooled 20/60 over 19/60, no per-block orientation
  CHECK(*combine_blocks(mixed, Feature::O) == doctest::Approx(20.0 / 19.0));
  CHECK(*combine_blocks(mixed, Feature::P) == doctest::Approx(20.0 / 19.0));

  // First-slot follower. Per template the O ratios are 4 ("larger") and 1/4
  // ("smaller"); pooled without alignment they would cancel to 1.
  std::vector<AnnotatedRecord> rs;
  for (const auto& [tmpl, pol] : {std::pair{"rivers.pos1", Polarity::positive}, {"rivers.neg1", Polarity::negative}}) {
    for (int i = 0; i < 20; ++i) {
      const bool o = i < 10;
      const bool asked_first = pol == Polarity::positive ? o : !o;
      const bool correct = asked_first ? i % 10 < 8 : i % 10 < 2;
      auto a = cell_record(o ? 4 : 0, correct, tmpl, "rivers", i);
      a.record.polarity = pol;
      const auto gt = to_choice(a.record.gt_choice());
      a.record.model_choice = correct ? gt : flip(gt);
      rs.push_back(a);
    }
  }
  CHECK(*risk_ratio(rs, Feature::O) == doctest::Approx(4.0));
  CHECK(*estimate_rr(rs, Feature::O) == doctest::Approx(4.0));
  CHECK_FALSE(estimate_rr(rs, Feature::P));  // P is constant here
  // a second-slot follower folds to the same size
  for (auto& a : rs) a.record.model_choice = flip(a.record.model_choice);
  CHECK(*risk_ratio(rs, Feature::O) == doctest::Approx(0.25));
  CHECK(*estimate_rr(rs, Feature::O) == doctest::Approx(4.0));
}

TEST_CASE("bootstrap preconditions") {
  std::vector<AnnotatedRecord> rs;
  add_block(rs, "t1", 10, 5, 10, 5);
  BootstrapOptions o;
  o.n_resamples = 0;
  CHECK_THROWS_AS(bootstrap_ci(rs, Feature::P, o), std::invalid_argument);
  o.n_resamples = 10;
  CHECK_THROWS_AS(bootstrap_ci(rs, Feature::P, o), std::invalid_argument);
  o.unit = BootstrapUnit::record;
  CHECK(bootstrap_ci(rs, Feature::P, o));
}

TEST_CASE("identical blocks give a zero-width interval") {
  std::vector<AnnotatedRecord> rs;
  add_block(rs, "t1", 10, 6, 10, 3);
  add_block(rs, "t2", 10, 6, 10, 3);
  BootstrapOptions o;
  o.n_resamples = 200;
  const auto est = *bootstrap_ci(rs, Feature::P, o);
  CHECK(est.rr == doctest::Approx(2));
  CHECK(est.ci_low == doctest::Approx(2));
  CHECK(est.ci_high == doctest::Approx(2));
  CHECK(est.blocks == 2);
  CHECK(est.dropped == 0);
}

TEST_CASE("two blocks with rr 1 and 3 against the enumerated resample space") {
  std::vector<AnnotatedRecord> rs;
  add_block(rs, "t1", 10, 5, 10, 5);  // rr 1
  add_block(rs, "t2", 10, 6, 10, 2);  // rr 3
  // resamples: {t1,t1} -> 1, {t2,t2} -> 3, mixed -> pooled 11/20 / (7/20)
  const double pooled = (11.0 / 20.0) / (7.0 / 20.0);
  const std::set<double> space{1.0, 3.0, pooled};
  BootstrapOptions o;
  o.n_resamples = 2000;
  o.seed = 5;
  const auto est = *bootstrap_ci(rs, Feature::P, o);
  CHECK(est.rr == doctest::Approx(pooled));
  CHECK(est.ci_low >= 1.0 - 1e-12);
  CHECK(est.ci_high <= 3.0 + 1e-12);
  // each extreme has mass 1/4, so both percentiles land on it
  CHECK(est.ci_low == doctest::Approx(1.0));
  CHECK(est.ci_high == doctest::Approx(3.0));
  CHECK(est.ci_low <= est.rr);
  CHECK(est.rr <= est.ci_high);
}

TEST_CASE("bootstrap is independent of the thread count") {
  Rng rng(3);
  std::vector<AnnotatedRecord> rs;
  for (int b = 0; b < 6; ++b) {
    const int n1 = 20 + static_cast<int>(rng.index(20)), n0 = 20 + static_cast<int>(rng.index(20));
    add_block(rs, "t" + std::to_string(b), n1, static_cast<int>(rng.index(n1)) + 1, n0, static_cast<int>(rng.index(n0)) + 1);
  }
  BootstrapOptions o;
  o.n_resamples = 500;
  o.seed = 77;
  const auto one = *bootstrap_ci(rs, Feature::P, o);
  o.threads = 4;
  const auto four = *bootstrap_ci(rs, Feature::P, o);
  CHECK(one.ci_low == four.ci_low);
  CHECK(one.ci_high == four.ci_high);
  o.unit = BootstrapUnit::record;
  const auto rec = *bootstrap_ci(rs, Feature::P, o);
  CHECK(rec.rr == one.rr);
  CHECK(rec.ci_low <= rec.rr);
}

TEST_CASE("percentile interpolates linearly") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(percentile(v, 0) == 1);
  CHECK(percentile(v, 1) == 5);
  CHECK(percentile(v, 0.5) == 3);
  CHECK(percentile(v, 0.1) == doctest::Approx(1.4));
  CHECK_THROWS(percentile(std::vector<double>{}, 0.5));
}
