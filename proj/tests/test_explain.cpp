#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "cueaudit/explain.hpp"
#include "sim.hpp"
#include "support.hpp"

using namespace cueaudit;
using testing::record;

namespace {

// Record whose first-slot entity is more popular iff `first_popular`, with cooc scores set.
AnalysisRecord meta_record(bool first_popular, bool first_cooc, Choice choice) {
  auto r = record(1, 2, choice);
  r.pair.entity_a.qrank = first_popular ? 100 : 10;
  r.pair.entity_b.qrank = first_popular ? 10 : 100;
  r.cooc_a = first_cooc ? 0.5 : 0.1;
  r.cooc_b = first_cooc ? 0.1 : 0.5;
  r.numex_a = 1;
  r.numex_b = 2;
  return r;
}

}  // namespace

TEST_CASE("logistic gradient closed forms") {
  Matrix X{{1, 0}};
  std::vector<double> y{1};
  std::vector<double> w{0, 0, 0};
  const auto g = logistic_gradient(w, X, y, 0);
  CHECK(g[0] == doctest::Approx(-0.5));
  CHECK(g[1] == doctest::Approx(0));
  CHECK(g[2] == doctest::Approx(-0.5));

  Matrix Xb{{1, 2}, {3, 4}, {-1, 0}, {2, -2}};
  std::vector<double> yb{1, 0, 1, 0};
  CHECK(logistic_gradient(w, Xb, yb, 1e-4)[2] == doctest::Approx(0));
  CHECK(log_loss(w, Xb, yb, 0) == doctest::Approx(std::log(2.0)));

  // l2 touches the weights but not the bias
  std::vector<double> w2{1, 1, 1};
  const auto with = logistic_gradient(w2, Xb, yb, 0.5);
  const auto without = logistic_gradient(w2, Xb, yb, 0);
  CHECK(with[0] - without[0] == doctest::Approx(0.5));
  CHECK(with[2] == doctest::Approx(without[2]));
  CHECK_THROWS_AS(logistic_gradient(std::vector<double>{0, 0}, Xb, yb, 0), std::invalid_argument);
}

TEST_CASE("gradient matches central differences") {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    Matrix X;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
      X.push_back({rng.normal(), rng.normal()});
      y.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
    }
    std::vector<double> w{rng.normal(), rng.normal(), rng.normal()};
    const auto g = logistic_gradient(w, X, y, 1e-4);
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double h = 1e-5;
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double fd = (log_loss(wp, X, y, 1e-4) - log_loss(wm, X, y, 1e-4)) / (2 * h);
      CHECK(std::abs(fd - g[j]) <= 1e-6 * std::max(1.0, std::abs(g[j])));
    }
  }
}

TEST_CASE("fitting") {
  Matrix X{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}};
  std::vector<double> y{0, 1, 0, 1, 1, 1};
  const auto m = fit_logistic(X, y);
  CHECK(m.converged);
  CHECK(m.weights.size() == 3);
  CHECK(m.weights[0] > 0);
  CHECK(m.predict(std::vector<double>{1, 0}) == 1);

  std::vector<double> ones(6, 1.0);
  const auto c = fit_logistic(X, ones);
  CHECK(c.constant);
  CHECK(c.predict(std::vector<double>{0, 0}) == 1);

  LogisticOptions few;
  few.max_iterations = 2;
  const auto nc = fit_logistic(X, y, few);
  CHECK(!nc.converged);
  CHECK(nc.iterations == 2);
  CHECK(nc.gradient_norm > 0);
  CHECK_THROWS_AS(fit_logistic({}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("meta features") {
  auto r = meta_record(true, false, Choice::first);
  auto x = *meta_features(r);
  CHECK(x[0] == 1);
  CHECK(x[1] == 0);
  r.ordering = Ordering::ba;
  x = *meta_features(r);
  CHECK(x[0] == 0);
  CHECK(x[1] == 1);
  r.pair.entity_b.qrank = r.pair.entity_a.qrank;
  CHECK((*meta_features(r))[0] == 0);  // tie
  r.cooc_b.reset();
  CHECK(!meta_features(r));
}

TEST_CASE("meta-predictor cross-validation") {
  std::vector<AnalysisRecord> few(24, meta_record(true, true, Choice::first));
  CHECK_THROWS_AS(fit_meta_predictor(few, 1), std::invalid_argument);

  SUBCASE("constant labels give a flagged constant model") {
    std::vector<AnalysisRecord> rs;
    for (int i = 0; i < 40; ++i) rs.push_back(meta_record(i % 2, i % 3 == 0, Choice::first));
    const auto fit = fit_meta_predictor(rs, 1);
    CHECK(fit.cv_accuracy == 1.0);
    CHECK(fit.any_constant);
    CHECK(*fit.prediction_for(0) == Choice::first);
  }

  SUBCASE("popularity-driven labels are learned out of fold") {
    std::vector<AnalysisRecord> rs;
    for (int i = 0; i < 103; ++i) {
      const bool pop = i % 2;
      rs.push_back(meta_record(pop, i % 3 == 0, pop ? Choice::first : Choice::second));
    }
    rs.push_back(meta_record(true, true, Choice::unknown));
    auto missing = meta_record(true, true, Choice::first);
    missing.cooc_a.reset();
    rs.push_back(missing);
    const auto fit = fit_meta_predictor(rs, 9);
    CHECK(fit.excluded == 2);
    CHECK(fit.used.size() == 103);
    CHECK(fit.cv_accuracy == 1.0);
    CHECK(fit.fold_models.size() == 5);
    CHECK(!fit.prediction_for(103));
    CHECK(fit.model_for(104) == nullptr);
    for (const auto& m : fit.fold_models) CHECK(std::abs(m.weights[0]) > std::abs(m.weights[1]));

    // stratified: per-fold class counts differ by at most one
    std::map<int, int> pos, neg;
    for (std::size_t k = 0; k < fit.used.size(); ++k)
      (rs[fit.used[k]].model_choice == Choice::first ? pos : neg)[fit.fold_of[k]]++;
    for (auto* counts : {&pos, &neg}) {
      int lo = 1 << 30, hi = 0;
      for (int f = 0; f < 5; ++f) {
        lo = std::min(lo, (*counts)[f]);
        hi = std::max(hi, (*counts)[f]);
      }
      CHECK(hi - lo <= 1);
    }
    // each prediction came from the model of its own held-out fold
    for (std::size_t k = 0; k < fit.used.size(); ++k) {
      const auto i = fit.used[k];
      CHECK(fit.model_for(i) == &fit.fold_models[static_cast<std::size_t>(fit.fold_of[k])]);
      CHECK(predict_meta(*fit.model_for(i), rs[i]) == *fit.prediction_for(i));
    }
    // the same seed gives the same folds
    CHECK(fit_meta_predictor(rs, 9).fold_of == fit.fold_of);
  }
}

TEST_CASE("improvement over numbers") {
  std::vector<AnalysisRecord> rs;
  for (int i = 0; i < 50; ++i) {
    // numbers say b (second under ab); answer always second; first is never more popular
    rs.push_back(meta_record(false, false, Choice::second));
  }
  const auto fit = fit_meta_predictor(rs, 2);
  const auto imp = *improvement_over_numbers(rs, fit);
  CHECK(imp.n == 50);
  CHECK(imp.meta_accuracy == 1.0);
  CHECK(imp.numex_accuracy == 1.0);
  CHECK(imp.improvement == 0.0);
}

TEST_CASE("case table over all eight agreement patterns") {
  const Choice F = Choice::first, S = Choice::second;
  struct Row {
    Choice p, n, m;
    int expected;
  };
  const Row rows[] = {{F, F, F, 2}, {F, F, S, 1}, {F, S, F, 3}, {F, S, S, 4},
                      {S, S, S, 2}, {S, S, F, 1}, {S, F, S, 3}, {S, F, F, 4}};
  for (const auto& r : rows) {
    const auto c = *classify_case(r.p, r.n, r.m, true);
    CHECK(c.case_id == r.expected);
    CHECK(classify_case(flip(r.p), flip(r.n), flip(r.m), true)->case_id == r.expected);
  }
  CHECK(!classify_case(Choice::unknown, F, F, true));
  CHECK(!classify_case(F, Choice::unknown, F, true));
  CHECK(!classify_case(F, F, Choice::unknown, true));

  auto rec = record(1, 2, Choice::second);  // correct: b larger, second slot
  rec.numex_a = 1;
  rec.numex_b = 2;
  const auto c = *classify_case(rec, Choice::second);
  CHECK(c.case_id == 2);
  CHECK(c.correct_vs_gt);
  rec.numex_b = 1;
  CHECK(!classify_case(rec, Choice::second));
  for (int k = 1; k <= 4; ++k) CHECK(!migration_label(k).empty());
}

TEST_CASE("swap probe bookkeeping") {
  LogisticModel always_first;
  always_first.constant = true;
  always_first.constant_label = 1;
  std::vector<SwapInput> in;
  for (int i = 0; i < 4; ++i) {
    auto r = meta_record(true, true, Choice::second);
    r.numex_a = 1;
    r.numex_b = 2;
    in.push_back({r, &always_first});
  }
  in[3].model = nullptr;

  SUBCASE("an unchanged answer that tracks the numbers stays case 1 or 2") {
    // re-ask answers the same entity (b), which now sits in the first slot
    const auto out = swap_probe(in, [](const AnalysisRecord& f) {
      auto r = f;
      r.model_choice = to_choice(slot_of_side(r.ordering, Side::b));
      return std::optional<AnalysisRecord>(r);
    });
    CHECK(out.probes == 4);
    CHECK(out.excluded == 1);
    CHECK(out.landed[1] == 3);  // first everywhere now: pairwise, numbers and meta agree
    CHECK(out.entity_changed == 0);
  }
  SUBCASE("failed re-queries are excluded and counted") {
    const auto out = swap_probe(in, [](const AnalysisRecord&) { return std::optional<AnalysisRecord>(); });
    CHECK(out.excluded == 4);
    CHECK(out.landed[0] + out.landed[1] + out.landed[2] + out.landed[3] == 0);
  }
}

TEST_CASE("cohen's d") {
  const std::vector<double> a{1, 2, 3}, b{1, 2, 3};
  CHECK(*cohens_d(a, b) == 0);
  // sample variances 1 and 3, means 2 and 1
  const std::vector<double> v1{1, 2, 3}, v3{1 - std::sqrt(3.0), 1, 1 + std::sqrt(3.0)};
  CHECK(*cohens_d(v1, v3) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(*cohens_d(v3, v1) == doctest::Approx(-1 / std::sqrt(2.0)));
  const std::vector<double> u1{0, 2}, u0{-1, 1};
  CHECK(*cohens_d(u1, u0) == doctest::Approx(1 / std::sqrt(2.0)));
  const std::vector<double> flat{2, 2}, one{1};
  CHECK(!cohens_d(flat, flat));
  CHECK(!cohens_d(one, a));
}

TEST_CASE("case contrast features") {
  auto r = record(10, 1000, Choice::first);
  r.pair.entity_a.qrank = 50;
  r.pair.entity_b.qrank = 50;
  r.numex_a = 10;
  r.numex_b = 500;
  r.cv_a = 0.0;
  r.cv_b = 0.5;
  const auto f = case_contrast_features(r);
  CHECK(*f[0] == doctest::Approx(std::log(100.0)));  // mean log of 10 and 1000
  CHECK(*f[0] == doctest::Approx(4.605).epsilon(1e-3));
  CHECK(*f[1] == doctest::Approx(std::log(100.0)));
  CHECK(*f[3] == doctest::Approx(std::log(50.0)));
  // smape(10, 10) = 0 hits the floor
  CHECK(*f[4] == doctest::Approx((std::log(kLogFloor) + std::log(*smape(1000, 500))) / 2));
  CHECK(*f[6] == doctest::Approx((std::log(kLogFloor) + std::log(0.5)) / 2));
  CHECK(*f[8] == doctest::Approx(std::log(50.0)));
  CHECK(*f[9] == 0);
  r.numex_b.reset();
  const auto g = case_contrast_features(r);
  CHECK(!g[2]);
  CHECK(!g[3]);
  CHECK(!g[4]);
  CHECK(g[0]);
}
