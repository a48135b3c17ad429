#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cueaudit/catalog.hpp"
#include "cueaudit/prompting.hpp"

namespace cueaudit {

/// Unit aliases grouped by family (factor to the family's base unit) and
/// magnitude words (k, million, ...).
struct UnitTable {
  std::map<std::string, std::map<std::string, double>> families;
  std::map<std::string, double> magnitudes;

  static UnitTable from_json(const nlohmann::json& j);
  static UnitTable load(const std::filesystem::path& path);
  static const UnitTable& defaults();
};

struct DirectionalRule {
  std::string name;
  std::string pattern;  // with {X}, {Y}, {HIGH}, {LOW} placeholders
  enum class Winner { higher_x, higher_y, chosen_x } winner = Winner::higher_x;
};

struct DirectionalRules {
  std::vector<std::string> higher_words;
  std::vector<std::string> lower_words;
  std::vector<DirectionalRule> rules;

  static DirectionalRules from_json(const nlohmann::json& j);
  static DirectionalRules load(const std::filesystem::path& path);
  static const DirectionalRules& defaults();
};

enum class ParseStatus { ok, unknown };
enum class SelectionRule { none, single, closest_to_gt };

struct NumericParse {
  std::optional<double> value;
  ParseStatus status = ParseStatus::unknown;
  int candidates_seen = 0;
  SelectionRule selection_rule = SelectionRule::none;
  /// Closest-to-ground-truth picked a different candidate than the first one found.
  bool gt_changed_outcome = false;
};

struct NumberCandidate {
  double value = 0.0;  // in the canonical unit
  std::size_t offset = 0;
};

/// Removes a reasoning block: keeps text after the last `</think>`; an
/// unterminated `<think>` yields an empty answer.
std::string strip_reasoning(std::string_view text);

/// All numbers in `text`, magnitude-normalised and converted to the
/// spec's canonical unit. Occurrences of `mask_names` are blanked first.
std::vector<NumberCandidate> extract_numbers(std::string_view text, const AttributeSpec& spec,
                                             const UnitTable& units = UnitTable::defaults(),
                                             const std::vector<std::string>& mask_names = {});

NumericParse parse_numeric(std::string_view text, const AttributeSpec& spec, double gt_value,
                           const UnitTable& units = UnitTable::defaults(),
                           const std::vector<std::string>& mask_names = {});

enum class Choice { first, second, unknown };
enum class ResolutionStep { verbatim, directional, substring, fuzzy, none };

std::string_view to_string(Choice c);
std::string_view to_string(ResolutionStep s);
Choice choice_from_string(std::string_view s);
ResolutionStep resolution_step_from_string(std::string_view s);
constexpr Choice flip(Choice c) {
  return c == Choice::first ? Choice::second : (c == Choice::second ? Choice::first : Choice::unknown);
}
constexpr Choice to_choice(Slot s) { return s == Slot::first ? Choice::first : Choice::second; }

struct PairwiseParse {
  Choice choice = Choice::unknown;
  ResolutionStep resolution_step = ResolutionStep::none;
};

struct PairwiseParseOptions {
  double fuzzy_threshold = 90.0;
  double fuzzy_margin = 5.0;
};

/// Resolves which of the two names the text picks, mapping the result to
/// prompt slots through `ordering` (ab: name_a fills the first slot).
/// Ladder: verbatim, directional phrase, unambiguous substring, fuzzy.
PairwiseParse parse_pairwise(std::string_view text, std::string_view name_a, std::string_view name_b,
                             Ordering ordering, Polarity polarity = Polarity::positive,
                             const DirectionalRules& rules = DirectionalRules::defaults(),
                             const PairwiseParseOptions& options = {});

/// Token-set similarity in [0, 100], in the style of thefuzz's token_set_ratio.
double token_set_ratio(std::string_view s1, std::string_view s2);
/// Indel-normalised similarity in [0, 100].
double simple_ratio(std::string_view s1, std::string_view s2);

}  // namespace cueaudit
