#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cueaudit/catalog.hpp"
#include "cueaudit/parsing.hpp"
#include "cueaudit/prompting.hpp"

namespace cueaudit {

/// One pairwise prompt joined with everything downstream analysis needs.
/// Entity-level fields are keyed by pair side (a/b); choices are prompt slots.
struct AnalysisRecord {
  std::string model;
  std::string dataset;
  ComparisonPair pair;
  std::string template_id;
  Polarity polarity = Polarity::positive;
  Ordering ordering = Ordering::ab;
  Mode mode = Mode::plain;
  Choice model_choice = Choice::unknown;
  ResolutionStep resolution_step = ResolutionStep::none;
  std::optional<double> numex_a;
  std::optional<double> numex_b;
  std::optional<double> cooc_a;
  std::optional<double> cooc_b;
  std::optional<double> cv_a;
  std::optional<double> cv_b;

  double qrank_a() const { return static_cast<double>(pair.entity_a.qrank); }
  double qrank_b() const { return static_cast<double>(pair.entity_b.qrank); }

  /// Slot holding the entity the prompt asks for.
  Slot gt_choice() const;
  /// Slot implied by the extracted numbers; nullopt when missing or tied.
  std::optional<Slot> numex_choice() const;
  /// Has a resolved pairwise answer and both extracted numbers.
  bool valid() const { return model_choice != Choice::unknown && numex_a && numex_b; }
};

/// Slot of the answer under a polarity given which side is larger.
Slot answer_slot(Side larger, Ordering ordering, Polarity polarity);

struct FilterReport {
  std::size_t total = 0;
  std::size_t unknown_choice = 0;
  std::size_t missing_numex = 0;
  std::size_t kept = 0;
};

/// Drops records without a valid pairwise answer or numeric extraction.
std::vector<AnalysisRecord> filter_valid(std::span<const AnalysisRecord> records, FilterReport* report = nullptr);

/// A rate with its support; `value` is empty when the support is empty.
struct Metric {
  std::optional<double> value;
  std::size_t n = 0;
  std::size_t excluded = 0;
};

Metric pairwise_accuracy(std::span<const AnalysisRecord> records);
/// Records with tied or missing numbers are excluded and counted.
Metric internal_consistency(std::span<const AnalysisRecord> records);
Metric numerical_accuracy(std::span<const AnalysisRecord> records);

/// Symmetric absolute percentage error in [0, 2]; empty when both are zero.
std::optional<double> smape(double y, double yhat);

/// Population standard deviation over mean; empty when the mean is zero.
/// Throws std::invalid_argument for fewer than two values.
std::optional<double> cv(std::span<const double> values);

/// Accuracy over positive-polarity templates minus negative-polarity ones.
std::optional<double> polarity_gap(std::span<const AnalysisRecord> records);

struct TemplateMajority {
  std::size_t full_agreement = 0;
  std::size_t two_vs_one = 0;
  std::size_t full_disagreement = 0;
  std::size_t groups_with_unknown = 0;
  std::size_t skipped_groups = 0;  // not exactly three template answers
  std::size_t groups() const { return full_agreement + two_vs_one + full_disagreement; }
};

/// Groups by (pair, polarity, ordering) and counts distinct answers across
/// the three templates; an unknown answer is its own outcome.
TemplateMajority template_majority(std::span<const AnalysisRecord> records);

}  // namespace cueaudit
