#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cueaudit/bos.hpp"
#include "cueaudit/cues.hpp"
#include "cueaudit/explain.hpp"
#include "cueaudit/gateway.hpp"
#include "cueaudit/metrics.hpp"
#include "cueaudit/parsing.hpp"
#include "cueaudit/prompting.hpp"

namespace cueaudit {

/// A CSV table with a fixed header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  void save(const std::filesystem::path& path) const;
  static Table parse_csv(std::istream& in, const std::string& source_name = "<stream>");
  static Table load(const std::filesystem::path& path);
  /// Index of a header column; throws LoadError if absent.
  std::size_t column(const std::string& name) const;
};

// ---- numeric extraction per entity -------------------------------------------

struct NumexResult {
  std::string model;
  std::string dataset;
  std::string entity_id;
  double gt = 0.0;
  std::optional<double> value;
  std::string template_id;           // the selected template, "" if none parsed
  std::optional<double> perplexity;
  std::optional<double> cv;          // across templates, missing answers as 0
  int candidates = 0;
  bool gt_changed_outcome = false;
  bool degraded = false;             // no logprobs: first parseable template used
};

/// Parses the three numeric completions for one entity and keeps the one with
/// the lowest perplexity.
NumexResult select_numex(const std::string& model, const AttributeSpec& spec, const EntityRecord& entity,
                         std::span<const NumericJob> jobs, std::span<const Completion> completions,
                         const UnitTable& units = UnitTable::defaults());

Table numex_table(std::span<const NumexResult> results);
std::vector<NumexResult> read_numex_table(const Table& t);

// ---- pairwise records ----------------------------------------------------------

/// Failed requests and thinking replies that ran out of tokens give unknown.
PairwiseParse parse_completion(const ComparisonJob& job, const Completion& c,
                               const DirectionalRules& rules = DirectionalRules::defaults());

AnalysisRecord make_record(const std::string& model, const ComparisonJob& job, const PairwiseParse& parse);

/// Co-occurrence score per entity id; empty when the dataset has no axis.
std::map<std::string, double> cooccurrence_scores(const EntityCatalog& catalog, const EmbeddingStore& store);

/// Copies numeric extractions, CVs and co-occurrence scores onto the record.
void attach_entity_data(AnalysisRecord& r, const std::map<std::string, NumexResult>& numex_by_entity,
                        const std::map<std::string, double>& cooc_by_entity);

void write_records(std::ostream& out, std::span<const AnalysisRecord> records);
std::vector<AnalysisRecord> read_records(std::istream& in, const std::string& source_name = "<stream>");

// ---- analysis ------------------------------------------------------------------

struct AnalysisOptions {
  std::uint64_t seed = 0;
  BootstrapOptions bootstrap;
};

struct Reports {
  Table metrics;
  Table numex;
  Table sensitivity;
  Table bos;
  Table meta;
  Table meta_summary;
  Table cases;
  Table effects;
  std::map<std::string, const Table*> all() const;
};

struct StratumFit {
  std::string dataset;
  std::string template_id;
  std::vector<AnalysisRecord> records;  // filtered records of the stratum
  std::optional<MetaFit> fit;
  std::optional<Improvement> improvement;
  std::string status;                   // "ok" or the reason it was skipped
};

/// Meta-predictor fits for one model's filtered records, per (dataset, template).
std::vector<StratumFit> fit_strata(std::span<const AnalysisRecord> filtered, const std::string& model,
                                   std::uint64_t seed);

/// Every report table. Records may span several models.
Reports analyze(std::span<const AnalysisRecord> records, std::span<const NumexResult> numex,
                const AnalysisOptions& options);

/// Re-asks one record with its ordering flipped; empty on failure.
using Reasker = std::function<std::optional<AnalysisRecord>(const AnalysisRecord& flipped)>;

struct SwapReports {
  Table swap;          // model, dataset, case, label, count, share
  Table swap_summary;  // model, dataset, probes, excluded, entity_changed
};

/// Runs the order-swap probe on every Case-2 record. `reask_for(model)` returns
/// the function that re-queries that model.
SwapReports probe_swap(std::span<const AnalysisRecord> records, std::uint64_t seed,
                       const std::function<Reasker(const std::string& model)>& reask_for);

/// Builds a Reasker on top of a gateway.
Reasker gateway_reasker(Gateway& gateway, const TemplateRegistry& registry, double temperature,
                        std::string thinking_marker, const DirectionalRules& rules = DirectionalRules::defaults());

}  // namespace cueaudit
