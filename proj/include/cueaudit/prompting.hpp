#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cueaudit/catalog.hpp"

namespace cueaudit {

enum class TemplateKind { pairwise, numeric };
enum class Polarity { positive, negative, none };
enum class Ordering { ab, ba };
enum class Mode { plain, thinking };
enum class Slot { first, second };

std::string_view to_string(Polarity p);
std::string_view to_string(Ordering o);
std::string_view to_string(Mode m);
std::string_view to_string(Slot s);
Polarity polarity_from_string(std::string_view s);
Ordering ordering_from_string(std::string_view s);
Mode mode_from_string(std::string_view s);

constexpr Ordering flip(Ordering o) { return o == Ordering::ab ? Ordering::ba : Ordering::ab; }
constexpr Slot flip(Slot s) { return s == Slot::first ? Slot::second : Slot::first; }

/// Which pair side fills a prompt slot under an ordering.
constexpr Side side_in_slot(Ordering o, Slot s) {
  return (o == Ordering::ab) == (s == Slot::first) ? Side::a : Side::b;
}
constexpr Slot slot_of_side(Ordering o, Side side) {
  return (o == Ordering::ab) == (side == Side::a) ? Slot::first : Slot::second;
}

inline constexpr std::string_view kSystemPrompt =
    "You are a chatbot to help with general knowledge questions. You answer as short and concise as "
    "possible. Meaning, you should not provide more information than what is asked for. If you are "
    "asked to compare two entities answer with the name of the correct one only.";

inline constexpr std::string_view kDefaultThinkingMarker = "<think>";
inline constexpr int kPlainMaxNewTokens = 64;
inline constexpr int kThinkingMaxNewTokens = 1024;

struct PromptTemplate {
  std::string template_id;
  std::string dataset_name;
  TemplateKind kind = TemplateKind::pairwise;
  Polarity polarity = Polarity::none;
  std::string body;

  /// Slot-count and polarity checks; throws ValidationError.
  void validate() const;
};

class TemplateRegistry {
 public:
  TemplateRegistry() = default;

  static TemplateRegistry from_json(const nlohmann::json& j);
  static TemplateRegistry load(const std::filesystem::path& path);

  void add(PromptTemplate t);

  /// Pairwise templates for a dataset, positive ones first, in file order.
  /// Throws ConfigError unless exactly 3 positive and 3 negative exist.
  std::vector<const PromptTemplate*> pairwise(const std::string& dataset) const;
  /// Throws ConfigError unless exactly 3 numeric templates exist.
  std::vector<const PromptTemplate*> numeric(const std::string& dataset) const;

  const PromptTemplate* find(const std::string& template_id) const;
  std::vector<std::string> datasets() const;
  bool empty() const { return templates_.empty(); }

 private:
  std::vector<PromptTemplate> templates_;
  std::map<std::string, std::size_t> by_id_;
};

struct ComparisonJob {
  std::string dataset;
  ComparisonPair pair;
  std::string template_id;
  Ordering ordering = Ordering::ab;
  Polarity polarity = Polarity::positive;
  Mode mode = Mode::plain;
  std::string user_text;
  std::string system_text;
  int max_new_tokens = kPlainMaxNewTokens;

  const EntityRecord& entity_in(Slot s) const { return pair.get(side_in_slot(ordering, s)); }
};

struct NumericJob {
  std::string dataset;
  EntityRecord entity;
  std::string template_id;
  std::string user_text;
  std::string system_text;
  int max_new_tokens = kPlainMaxNewTokens;
};

using Job = std::variant<ComparisonJob, NumericJob>;

/// Single-pass placeholder substitution; substituted text is never rescanned.
std::string substitute(std::string_view body, const std::map<std::string, std::string>& values);

/// Six templates times two orderings. Thinking mode routes every job through apply_thinking.
std::vector<ComparisonJob> render_pairwise(const std::string& dataset, const ComparisonPair& pair,
                                           const TemplateRegistry& registry, Mode mode,
                                           std::string_view thinking_marker = kDefaultThinkingMarker);

ComparisonJob render_one(const std::string& dataset, const ComparisonPair& pair,
                         const PromptTemplate& tmpl, Ordering ordering, Mode mode,
                         std::string_view thinking_marker = kDefaultThinkingMarker);

std::vector<NumericJob> render_numeric(const std::string& dataset, const EntityRecord& entity,
                                       const TemplateRegistry& registry);

/// Appends the start-of-thought marker and raises the token budget.
/// Throws std::logic_error if the job is already in thinking mode.
ComparisonJob apply_thinking(ComparisonJob job, std::string_view marker = kDefaultThinkingMarker);

const std::string& user_text(const Job& job);
const std::string& system_text(const Job& job);
int max_new_tokens(const Job& job);
std::uint64_t content_hash(const Job& job);

nlohmann::json to_json(const ComparisonJob& job);
ComparisonJob comparison_job_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NumericJob& job);
NumericJob numeric_job_from_json(const nlohmann::json& j);

}  // namespace cueaudit
