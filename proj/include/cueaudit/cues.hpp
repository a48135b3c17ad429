#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cueaudit/catalog.hpp"
#include "cueaudit/errors.hpp"
#include "cueaudit/metrics.hpp"

namespace cueaudit {

/// Raised when a dataset has no usable magnitude axis.
class CueUnavailableError : public Error {
 public:
  using Error::Error;
};

/// Word vectors with case-normalised keys. Immutable after construction.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dimension) : dimension_(dimension) {}

  /// word2vec text format: optional "count dim" header, then token and floats
  /// per line. A "/c/en/" prefix on tokens is dropped.
  static EmbeddingStore parse(std::istream& in, const std::string& source_name = "<stream>");
  static EmbeddingStore load(const std::filesystem::path& path);
  void write(std::ostream& out) const;

  /// Throws ValidationError on a dimension mismatch.
  void add(std::string_view key, std::vector<double> vec);
  const std::vector<double>* find(std::string_view key) const;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

  /// Lowercase, whitespace runs joined by underscores.
  static std::string normalize_key(std::string_view key);

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// The entity's embedding key: its explicit key, else its normalised name.
std::string embedding_key_for(const EntityRecord& e);

struct MagnitudeAxis {
  std::vector<double> axis;
  std::vector<std::string> missing_keywords;
  bool degenerate() const;  // all zero
};

/// v+ - v-, the means of the found positive and negative keyword vectors.
/// Throws CueUnavailableError if either side has no keyword in the store.
MagnitudeAxis magnitude_axis(const AttributeSpec& spec, const EmbeddingStore& store);

double cosine(const std::vector<double>& u, const std::vector<double>& v);

/// cos(e, axis); empty when the entity is not in the store or the axis is zero.
std::optional<double> cooccurrence_score(const EntityRecord& entity, const std::vector<double>& axis,
                                         const EmbeddingStore& store);

enum class Feature { P, O, C, I };
inline constexpr std::array<Feature, 4> kFeatures{Feature::P, Feature::O, Feature::C, Feature::I};
std::string_view to_string(Feature f);
Feature feature_from_string(std::string_view s);

/// Surface cues and the internal-alignment bit, relative to the higher-gt entity.
struct FeatureVector {
  std::optional<bool> P;
  std::optional<bool> O;
  std::optional<bool> C;
  std::optional<bool> I;

  std::optional<bool> get(Feature f) const;
  bool complete() const { return P && O && C && I; }
  /// Cell index 8P + 4O + 2C + I; requires complete().
  int cell() const;
};

/// Uses the co-occurrence scores stored on the record.
FeatureVector annotate(const AnalysisRecord& record);
/// Scores both entities against `axis` first.
FeatureVector annotate(const AnalysisRecord& record, const std::vector<double>& axis, const EmbeddingStore& store);

}  // namespace cueaudit
