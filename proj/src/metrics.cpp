#include "cueaudit/metrics.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace cueaudit {

Slot answer_slot(Side larger, Ordering ordering, Polarity polarity) {
  const Slot larger_slot = slot_of_side(ordering, larger);
  return polarity == Polarity::negative ? flip(larger_slot) : larger_slot;
}

Slot AnalysisRecord::gt_choice() const { return answer_slot(pair.larger, ordering, polarity); }

std::optional<Slot> AnalysisRecord::numex_choice() const {
  if (!numex_a || !numex_b || *numex_a == *numex_b) return std::nullopt;
  return answer_slot(*numex_a > *numex_b ? Side::a : Side::b, ordering, polarity);
}

std::vector<AnalysisRecord> filter_valid(std::span<const AnalysisRecord> records, FilterReport* report) {
  FilterReport r;
  std::vector<AnalysisRecord> out;
  for (const auto& rec : records) {
    ++r.total;
    if (rec.model_choice == Choice::unknown) {
      ++r.unknown_choice;
    } else if (!rec.numex_a || !rec.numex_b) {
      ++r.missing_numex;
    } else {
      out.push_back(rec);
    }
  }
  r.kept = out.size();
  if (report) *report = r;
  return out;
}

namespace {
Metric finish(std::size_t hits, std::size_t n, std::size_t excluded) {
  Metric m;
  m.n = n;
  m.excluded = excluded;
  if (n > 0) m.value = static_cast<double>(hits) / static_cast<double>(n);
  return m;
}
}  // namespace

Metric pairwise_accuracy(std::span<const AnalysisRecord> records) {
  std::size_t hits = 0, n = 0, excluded = 0;
  for (const auto& r : records) {
    if (r.model_choice == Choice::unknown) {
      ++excluded;
      continue;
    }
    ++n;
    hits += r.model_choice == to_choice(r.gt_choice());
  }
  return finish(hits, n, excluded);
}

Metric internal_consistency(std::span<const AnalysisRecord> records) {
  std::size_t hits = 0, n = 0, excluded = 0;
  for (const auto& r : records) {
    const auto implied = r.numex_choice();
    if (r.model_choice == Choice::unknown || !implied) {
      ++excluded;
      continue;
    }
    ++n;
    hits += r.model_choice == to_choice(*implied);
  }
  return finish(hits, n, excluded);
}

Metric numerical_accuracy(std::span<const AnalysisRecord> records) {
  std::size_t hits = 0, n = 0, excluded = 0;
  for (const auto& r : records) {
    const auto implied = r.numex_choice();
    if (!implied) {
      ++excluded;
      continue;
    }
    ++n;
    hits += *implied == r.gt_choice();
  }
  return finish(hits, n, excluded);
}

std::optional<double> smape(double y, double yhat) {
  const double denom = (std::abs(yhat) + std::abs(y)) / 2.0;
  if (denom == 0.0) return std::nullopt;
  return std::abs(yhat - y) / denom;
}

std::optional<double> cv(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("cv needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (mean == 0.0) return std::nullopt;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size())) / mean;
}

std::optional<double> polarity_gap(std::span<const AnalysisRecord> records) {
  std::vector<AnalysisRecord> pos;
  std::vector<AnalysisRecord> neg;
  for (const auto& r : records) (r.polarity == Polarity::negative ? neg : pos).push_back(r);
  const auto acc_pos = pairwise_accuracy(pos).value;
  const auto acc_neg = pairwise_accuracy(neg).value;
  if (!acc_pos || !acc_neg) return std::nullopt;
  return *acc_pos - *acc_neg;
}

TemplateMajority template_majority(std::span<const AnalysisRecord> records) {
  using Key = std::tuple<std::string, std::string, std::string, int, int>;
  std::map<Key, std::vector<std::pair<std::string, Choice>>> groups;
  for (const auto& r : records) {
    Key key{r.dataset, r.pair.entity_a.entity_id, r.pair.entity_b.entity_id, static_cast<int>(r.polarity),
            static_cast<int>(r.ordering)};
    groups[key].emplace_back(r.template_id, r.model_choice);
  }
  TemplateMajority out;
  for (const auto& [key, answers] : groups) {
    std::set<std::string> templates;
    for (const auto& a : answers) templates.insert(a.first);
    if (answers.size() != 3 || templates.size() != 3) {
      ++out.skipped_groups;
      continue;
    }
    std::set<Choice> distinct;
    bool any_unknown = false;
    for (const auto& a : answers) {
      distinct.insert(a.second);
      any_unknown |= a.second == Choice::unknown;
    }
    out.groups_with_unknown += any_unknown;
    switch (distinct.size()) {
      case 1: ++out.full_agreement; break;
      case 2: ++out.two_vs_one; break;
      default: ++out.full_disagreement; break;
    }
  }
  return out;
}

}  // namespace cueaudit
