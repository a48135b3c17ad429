#include "cueaudit/explain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cueaudit/rng.hpp"

namespace cueaudit {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double linear(std::span<const double> w, std::span<const double> x) {
  double z = w.back();
  for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
  return z;
}

void check_shapes(std::span<const double> w, const Matrix& X, std::span<const double> y) {
  if (X.size() != y.size()) throw std::invalid_argument("X and y differ in length");
  for (const auto& row : X)
    if (row.size() + 1 != w.size()) throw std::invalid_argument("weight length must be features + 1");
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double log_loss(std::span<const double> w, const Matrix& X, std::span<const double> y, double l2) {
  check_shapes(w, X, y);
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double z = linear(w, X[i]);
    loss += softplus(z) - y[i] * z;
  }
  if (!X.empty()) loss /= static_cast<double>(X.size());
  double reg = 0.0;
  for (std::size_t j = 0; j + 1 < w.size(); ++j) reg += w[j] * w[j];
  return loss + 0.5 * l2 * reg;
}

std::vector<double> logistic_gradient(std::span<const double> w, const Matrix& X, std::span<const double> y,
                                      double l2) {
  check_shapes(w, X, y);
  std::vector<double> g(w.size(), 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double r = sigmoid(linear(w, X[i])) - y[i];
    for (std::size_t j = 0; j < X[i].size(); ++j) g[j] += r * X[i][j];
    g.back() += r;
  }
  if (!X.empty())
    for (auto& gj : g) gj /= static_cast<double>(X.size());
  for (std::size_t j = 0; j + 1 < w.size(); ++j) g[j] += l2 * w[j];
  return g;
}

double LogisticModel::probability(std::span<const double> x) const {
  if (constant) return constant_label == 1 ? 1.0 : 0.0;
  return sigmoid(linear(weights, x));
}

LogisticModel fit_logistic(const Matrix& X, std::span<const double> y, const LogisticOptions& options) {
  if (X.empty()) throw std::invalid_argument("cannot fit on zero rows");
  LogisticModel m;
  m.weights.assign(X.front().size() + 1, 0.0);
  check_shapes(m.weights, X, y);

  const bool all_one = std::all_of(y.begin(), y.end(), [](double v) { return v == 1.0; });
  const bool all_zero = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
  if (all_one || all_zero) {
    m.constant = true;
    m.constant_label = all_one ? 1 : 0;
    m.converged = true;
    return m;
  }

  double loss = log_loss(m.weights, X, y, options.l2);
  std::vector<double> g;
  for (int it = 1; it <= options.max_iterations; ++it) {
    g = logistic_gradient(m.weights, X, y, options.l2);
    for (std::size_t j = 0; j < g.size(); ++j) m.weights[j] -= options.learning_rate * g[j];
    const double next = log_loss(m.weights, X, y, options.l2);
    m.iterations = it;
    const double delta = std::abs(loss - next);
    loss = next;
    if (delta < options.tolerance) {
      m.converged = true;
      break;
    }
  }
  g = logistic_gradient(m.weights, X, y, options.l2);
  double norm = 0.0;
  for (double gj : g) norm += gj * gj;
  m.gradient_norm = std::sqrt(norm);
  m.final_loss = loss;
  return m;
}

std::optional<std::array<double, 2>> meta_features(const AnalysisRecord& r) {
  const Side first = side_in_slot(r.ordering, Slot::first);
  const Side second = side_in_slot(r.ordering, Slot::second);
  const auto& c_first = first == Side::a ? r.cooc_a : r.cooc_b;
  const auto& c_second = second == Side::a ? r.cooc_a : r.cooc_b;
  if (!c_first || !c_second) return std::nullopt;
  const double more_popular = r.pair.get(first).qrank > r.pair.get(second).qrank ? 1.0 : 0.0;
  const double higher_cooc = *c_first > *c_second ? 1.0 : 0.0;
  return std::array<double, 2>{more_popular, higher_cooc};
}

Choice predict_meta(const LogisticModel& model, const AnalysisRecord& r) {
  const auto x = meta_features(r);
  if (!x) return Choice::unknown;
  return model.predict(*x) == 1 ? Choice::first : Choice::second;
}

std::optional<Choice> MetaFit::prediction_for(std::size_t i) const {
  const auto it = std::lower_bound(used.begin(), used.end(), i);
  if (it == used.end() || *it != i) return std::nullopt;
  return oof_prediction[static_cast<std::size_t>(it - used.begin())];
}

const LogisticModel* MetaFit::model_for(std::size_t i) const {
  const auto it = std::lower_bound(used.begin(), used.end(), i);
  if (it == used.end() || *it != i) return nullptr;
  return &fold_models[static_cast<std::size_t>(fold_of[static_cast<std::size_t>(it - used.begin())])];
}

MetaFit fit_meta_predictor(std::span<const AnalysisRecord> records, std::uint64_t seed,
                           const LogisticOptions& options) {
  MetaFit fit;
  Matrix X;
  std::vector<double> y;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto x = meta_features(records[i]);
    if (!x || records[i].model_choice == Choice::unknown) {
      ++fit.excluded;
      continue;
    }
    fit.used.push_back(i);
    X.push_back({(*x)[0], (*x)[1]});
    y.push_back(records[i].model_choice == Choice::first ? 1.0 : 0.0);
  }
  if (fit.used.size() < kMinMetaStratum)
    throw std::invalid_argument("meta-predictor needs at least " + std::to_string(kMinMetaStratum) +
                                " usable records, got " + std::to_string(fit.used.size()));

  // Stratified fold assignment: shuffle each class, deal round-robin.
  Rng rng(seed);
  fit.fold_of.assign(fit.used.size(), 0);
  int dealt = 0;
  for (double label : {1.0, 0.0}) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < y.size(); ++k)
      if (y[k] == label) members.push_back(k);
    for (std::size_t k = members.size(); k > 1; --k) std::swap(members[k - 1], members[rng.index(k)]);
    for (std::size_t k : members) fit.fold_of[k] = dealt++ % kMetaFolds;
  }

  fit.oof_prediction.assign(fit.used.size(), Choice::unknown);
  std::size_t hits = 0;
  for (int fold = 0; fold < kMetaFolds; ++fold) {
    Matrix Xtr;
    std::vector<double> ytr;
    for (std::size_t k = 0; k < X.size(); ++k) {
      if (fit.fold_of[k] == fold) continue;
      Xtr.push_back(X[k]);
      ytr.push_back(y[k]);
    }
    LogisticModel m = fit_logistic(Xtr, ytr, options);
    fit.any_constant |= m.constant;
    fit.all_converged &= m.converged;
    for (std::size_t k = 0; k < X.size(); ++k) {
      if (fit.fold_of[k] != fold) continue;
      const int pred = m.predict(X[k]);
      fit.oof_prediction[k] = pred == 1 ? Choice::first : Choice::second;
      hits += static_cast<double>(pred) == y[k];
    }
    fit.fold_models.push_back(std::move(m));
  }
  fit.cv_accuracy = static_cast<double>(hits) / static_cast<double>(fit.used.size());
  return fit;
}

std::optional<Improvement> improvement_over_numbers(std::span<const AnalysisRecord> records, const MetaFit& fit) {
  Improvement imp;
  std::size_t meta_hits = 0, numex_hits = 0;
  for (std::size_t k = 0; k < fit.used.size(); ++k) {
    const auto& r = records[fit.used[k]];
    const auto numex = r.numex_choice();
    if (!numex) continue;
    ++imp.n;
    meta_hits += fit.oof_prediction[k] == r.model_choice;
    numex_hits += to_choice(*numex) == r.model_choice;
  }
  if (imp.n == 0) return std::nullopt;
  imp.meta_accuracy = static_cast<double>(meta_hits) / static_cast<double>(imp.n);
  imp.numex_accuracy = static_cast<double>(numex_hits) / static_cast<double>(imp.n);
  imp.improvement = imp.meta_accuracy - imp.numex_accuracy;
  return imp;
}

std::optional<CaseLabel> classify_case(Choice pairwise, Choice numex, Choice meta, bool correct) {
  if (pairwise == Choice::unknown || numex == Choice::unknown || meta == Choice::unknown) return std::nullopt;
  const bool with_numex = pairwise == numex;
  const bool with_meta = pairwise == meta;
  int c = 4;
  if (with_numex && with_meta) {
    c = 2;
  } else if (with_numex) {
    c = 1;
  } else if (with_meta) {
    c = 3;
  }
  return CaseLabel{c, correct};
}

std::optional<CaseLabel> classify_case(const AnalysisRecord& r, Choice meta) {
  const auto numex = r.numex_choice();
  if (!numex) return std::nullopt;
  return classify_case(r.model_choice, to_choice(*numex), meta, r.model_choice == to_choice(r.gt_choice()));
}

std::string_view migration_label(int case_id) {
  switch (case_id) {
    case 1: return "answer held with the numbers; cue prediction moved";
    case 2: return "unchanged by the swap";
    case 3: return "answer moved with the cues, away from the numbers";
    case 4: return "answer moved away from both";
  }
  return "unclassified";
}

SwapOutcome swap_probe(std::span<const SwapInput> case2, const Requery& requery) {
  SwapOutcome out;
  for (const auto& in : case2) {
    ++out.probes;
    AnalysisRecord flipped = in.record;
    flipped.ordering = flip(in.record.ordering);
    flipped.model_choice = Choice::unknown;
    const auto answered = requery(flipped);
    if (!answered || !in.model) {
      ++out.excluded;
      continue;
    }
    const auto label = classify_case(*answered, predict_meta(*in.model, *answered));
    if (!label) {
      ++out.excluded;
      continue;
    }
    ++out.landed[static_cast<std::size_t>(label->case_id - 1)];
    const auto side_of = [](const AnalysisRecord& r) {
      return side_in_slot(r.ordering, r.model_choice == Choice::first ? Slot::first : Slot::second);
    };
    out.entity_changed += side_of(*answered) != side_of(in.record);
  }
  return out;
}

std::optional<double> cohens_d(std::span<const double> case1, std::span<const double> case3) {
  if (case1.size() < 2 || case3.size() < 2) return std::nullopt;
  auto moments = [](std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [m1, v1] = moments(case1);
  const auto [m0, v0] = moments(case3);
  const double sp = std::sqrt((v1 + v0) / 2.0);
  if (!(sp > 0.0) || !std::isfinite(sp)) return std::nullopt;
  return (m1 - m0) / sp;
}

std::array<std::optional<double>, 10> case_contrast_features(const AnalysisRecord& r) {
  std::array<std::optional<double>, 10> out;
  auto put = [&](std::size_t slot, std::optional<double> a, std::optional<double> b) {
    if (!a || !b) return;
    const double la = std::log(std::max(*a, kLogFloor));
    const double lb = std::log(std::max(*b, kLogFloor));
    out[2 * slot] = (la + lb) / 2.0;
    out[2 * slot + 1] = std::abs(la - lb);
  };
  const double gt_a = r.pair.entity_a.gt_value;
  const double gt_b = r.pair.entity_b.gt_value;
  put(0, gt_a, gt_b);
  put(1, r.numex_a, r.numex_b);
  const auto smape_a = r.numex_a ? smape(gt_a, *r.numex_a) : std::nullopt;
  const auto smape_b = r.numex_b ? smape(gt_b, *r.numex_b) : std::nullopt;
  put(2, smape_a, smape_b);
  put(3, r.cv_a, r.cv_b);
  put(4, r.qrank_a(), r.qrank_b());
  return out;
}

}  // namespace cueaudit
