#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cueaudit/metrics.hpp"

namespace cueaudit {

// ---- logistic regression ----------------------------------------------------

/// Rows of features; the bias is implicit and always the last weight.
using Matrix = std::vector<std::vector<double>>;

struct LogisticOptions {
  double l2 = 1e-4;  // on feature weights, not the bias
  double tolerance = 1e-8;
  int max_iterations = 10000;
  double learning_rate = 1.0;
};

/// Mean log-loss plus (l2 / 2) * |w without bias|^2.
double log_loss(std::span<const double> w, const Matrix& X, std::span<const double> y, double l2);
/// Gradient of log_loss with respect to w.
std::vector<double> logistic_gradient(std::span<const double> w, const Matrix& X, std::span<const double> y,
                                      double l2);

struct LogisticModel {
  std::vector<double> weights;  // features..., bias
  int iterations = 0;
  double final_loss = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  /// Single-class training data; predicts `constant_label` regardless of input.
  bool constant = false;
  int constant_label = 0;

  double probability(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return probability(x) >= 0.5 ? 1 : 0; }
};

/// Full-batch gradient descent. Throws std::invalid_argument on shape mismatch.
LogisticModel fit_logistic(const Matrix& X, std::span<const double> y, const LogisticOptions& options = {});

// ---- meta-predictor ---------------------------------------------------------

/// [first entity more popular], [first entity has the higher co-occurrence
/// score]. Ties give 0. Empty when a co-occurrence score is missing.
std::optional<std::array<double, 2>> meta_features(const AnalysisRecord& r);

inline constexpr std::size_t kMinMetaStratum = 25;
inline constexpr int kMetaFolds = 5;

struct MetaFit {
  std::vector<std::size_t> used;         // indices into the input records
  std::vector<int> fold_of;              // parallel to `used`
  std::vector<Choice> oof_prediction;    // parallel to `used`
  std::vector<LogisticModel> fold_models;
  std::size_t excluded = 0;              // missing features or unknown choice
  double cv_accuracy = 0.0;
  bool any_constant = false;
  bool all_converged = true;

  /// Out-of-fold meta choice for input record i, if it was used.
  std::optional<Choice> prediction_for(std::size_t i) const;
  /// The model that scored input record i out of fold.
  const LogisticModel* model_for(std::size_t i) const;
};

/// Stratified 5-fold CV within one stratum. Throws std::invalid_argument when
/// fewer than kMinMetaStratum records are usable.
MetaFit fit_meta_predictor(std::span<const AnalysisRecord> records, std::uint64_t seed,
                           const LogisticOptions& options = {});

Choice predict_meta(const LogisticModel& model, const AnalysisRecord& r);

struct Improvement {
  double meta_accuracy = 0.0;
  double numex_accuracy = 0.0;
  double improvement = 0.0;
  std::size_t n = 0;
};

/// Meta-predictor accuracy minus the numex-implied choice accuracy, both at
/// predicting the model's answer, over records where both are defined.
std::optional<Improvement> improvement_over_numbers(std::span<const AnalysisRecord> records, const MetaFit& fit);

// ---- cases ------------------------------------------------------------------

struct CaseLabel {
  int case_id = 0;  // 1..4
  bool correct_vs_gt = false;
};

/// Agreement table of the three predictions. Empty if any is unknown.
std::optional<CaseLabel> classify_case(Choice pairwise, Choice numex, Choice meta, bool correct);
std::optional<CaseLabel> classify_case(const AnalysisRecord& r, Choice meta);

/// Our short reading of where a swapped Case-2 prompt ended up.
std::string_view migration_label(int case_id);

struct SwapOutcome {
  std::array<std::size_t, 4> landed{};  // index case_id - 1
  std::size_t probes = 0;
  std::size_t excluded = 0;             // re-query failed or became unclassifiable
  std::size_t entity_changed = 0;       // the named entity differs after the swap
};

/// Re-asks a record with the ordering already flipped; returns the record with
/// its new model choice, or empty on failure.
using Requery = std::function<std::optional<AnalysisRecord>(const AnalysisRecord&)>;

struct SwapInput {
  AnalysisRecord record;
  const LogisticModel* model = nullptr;
};

SwapOutcome swap_probe(std::span<const SwapInput> case2, const Requery& requery);

// ---- effect sizes -----------------------------------------------------------

/// (mean1 - mean0) / sqrt((s1^2 + s0^2) / 2) with sample variances. Empty when
/// a group has fewer than two values or the pooled SD is zero.
std::optional<double> cohens_d(std::span<const double> case1, std::span<const double> case3);

inline constexpr double kLogFloor = 1e-9;
inline constexpr std::array<std::string_view, 10> kContrastFeatures{
    "gt_mean", "gt_diff", "numex_mean", "numex_diff", "smape_mean",
    "smape_diff", "cv_mean", "cv_diff", "qrank_mean", "qrank_diff"};

/// Mean and absolute difference of natural logs (floored at kLogFloor) for
/// GT, NumEx, SMAPE, CV and QRank. Missing inputs leave both slots empty.
std::array<std::optional<double>, 10> case_contrast_features(const AnalysisRecord& r);

}  // namespace cueaudit
