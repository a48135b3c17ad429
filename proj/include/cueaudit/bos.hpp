#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cueaudit/cues.hpp"
#include "cueaudit/metrics.hpp"

namespace cueaudit {

struct AnnotatedRecord {
  AnalysisRecord record;
  FeatureVector features;
  bool correct() const { return record.model_choice == to_choice(record.gt_choice()); }
};

/// Balancing result for one (dataset, template) group.
struct BosGroup {
  std::string dataset;
  std::string template_id;
  std::size_t total = 0;              // every input record of the group
  std::size_t undefined_features = 0; // excluded before balancing
  std::array<std::size_t, 16> cell_counts{};
  std::size_t minority_count = 0;
  bool available = false;             // false when some cell is empty
  std::vector<AnnotatedRecord> retained;
};

struct BosTable {
  std::vector<BosGroup> groups;  // ordered by (dataset, template_id)
  std::size_t retained() const;
  std::size_t total() const;
  std::vector<AnnotatedRecord> records() const;
};

/// Per template, keeps minority_count records drawn without replacement from
/// each of the 16 (P,O,C,I) cells. Records with an undefined bit are dropped.
BosTable build_bos(std::span<const AnnotatedRecord> records, std::uint64_t seed);

/// Pr(correct | F=1) / Pr(correct | F=0) over records where F is defined.
/// Empty when a conditional cell is empty or the denominator accuracy is 0.
/// O is polarity-aligned as in counts_of but not folded.
std::optional<double> risk_ratio(std::span<const AnnotatedRecord> records, Feature feature);

/// max(rr, 1/rr); empty for rr = 0.
std::optional<double> fold_direction(double rr);

/// rr + sqrt(rr (rr - 1)). Throws std::invalid_argument for rr < 1.
double e_value(double rr);

/// Feature-conditional counts of one (dataset, template) block. For O the
/// flag is taken relative to the answer the question asks for, so it flips
/// on negative-polarity prompts.
struct BlockCounts {
  double n1 = 0, c1 = 0, n0 = 0, c0 = 0;
};

/// Point estimate from pooled block counts. O is folded with fold_direction.
std::optional<double> combine_blocks(std::span<const BlockCounts> blocks, Feature feature);

/// Point estimate over annotated records, blocked by (dataset, template).
std::optional<double> estimate_rr(std::span<const AnnotatedRecord> records, Feature feature);

enum class BootstrapUnit { block, record };

struct BootstrapOptions {
  std::size_t n_resamples = 1000;
  std::uint64_t seed = 0;
  BootstrapUnit unit = BootstrapUnit::block;
  std::size_t threads = 1;
};

struct RiskRatioEstimate {
  Feature feature = Feature::P;
  double rr = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  std::size_t n_bootstrap = 0;
  std::size_t dropped = 0;  // resamples with an undefined RR
  std::size_t blocks = 0;
};

/// Percentile (2.5, 97.5) bootstrap interval. The point estimate uses all data;
/// the interval is widened to contain it. Empty when the point estimate is
/// undefined. Throws std::invalid_argument for zero resamples or fewer than
/// two blocks under block resampling.
std::optional<RiskRatioEstimate> bootstrap_ci(std::span<const AnnotatedRecord> records, Feature feature,
                                              const BootstrapOptions& options);

/// Linear-interpolated percentile of a sorted sample, q in [0, 1].
double percentile(std::span<const double> sorted, double q);

}  // namespace cueaudit
