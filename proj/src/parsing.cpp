#include "cueaudit/parsing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "cueaudit/errors.hpp"
#include "cueaudit/text.hpp"
#include "embedded_data.hpp"

namespace cueaudit {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }
bool is_alpha_byte(unsigned char c) { return std::isalpha(c) || c >= 0x80; }

nlohmann::json read_json(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw LoadError(std::string("cannot open ") + what + ": " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string(what) + " " + path.string() + ": " + e.what());
  }
}

/// Lowercase with typographic quotes folded to ASCII.
std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    // U+2018 / U+2019 and U+201C / U+201D
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80) {
      const auto c = static_cast<unsigned char>(s[i + 2]);
      if (c == 0x98 || c == 0x99 || c == 0x9C || c == 0x9D) {
        out += c <= 0x99 ? '\'' : '"';
        i += 2;
        continue;
      }
    }
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
  }
  return out;
}

/// Lowercase, punctuation to spaces, whitespace collapsed.
std::string normalize_tokens(std::string_view s) {
  const auto f = fold(s);
  std::string out;
  bool pending_space = false;
  for (unsigned char c : f) {
    if (is_word_byte(c)) {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += static_cast<char>(c);
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<std::string> tokens_of(std::string_view normalized) {
  std::vector<std::string> out;
  for (auto& t : split(normalized, ' ')) {
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

/// Whole-word occurrences of `needle` in `hay` (both already folded).
std::vector<std::pair<std::size_t, std::size_t>> word_occurrences(std::string_view hay, std::string_view needle) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (needle.empty()) return out;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) {
    const auto end = pos + needle.size();
    const bool left_ok = pos == 0 || !is_word_byte(static_cast<unsigned char>(hay[pos - 1])) ||
                         !is_word_byte(static_cast<unsigned char>(needle.front()));
    const bool right_ok = end == hay.size() || !is_word_byte(static_cast<unsigned char>(hay[end])) ||
                          !is_word_byte(static_cast<unsigned char>(needle.back()));
    if (left_ok && right_ok) out.emplace_back(pos, end);
  }
  return out;
}

bool contains_word_phrase(std::string_view hay, std::string_view needle) {
  return !word_occurrences(hay, needle).empty();
}

std::string regex_escape(std::string_view s) {
  static const std::string special = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

std::string alternation(const std::vector<std::string>& words) {
  // Longest first so "more populous" wins over "more".
  std::vector<std::string> sorted = words;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::string out = "(?:";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) out += '|';
    out += regex_escape(fold(sorted[i]));
  }
  return out + ")";
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

const std::set<std::string>& generic_tokens() {
  static const std::set<std::string> words = {
      "the", "of", "and", "a", "an", "de", "la", "le", "el", "in", "at", "on", "for", "du", "des", "von",
      "river", "mount", "mountain", "city", "university", "stadium", "building", "tower", "pepper", "state",
      "states", "republic", "kingdom", "college", "arena", "park", "lake", "national", "international",
      "center", "centre", "saint", "st", "new", "united", "federal", "democratic", "people's", "peoples"};
  return words;
}

std::optional<Side> unique_side(bool a, bool b) {
  if (a == b) return std::nullopt;
  return a ? Side::a : Side::b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tables

UnitTable UnitTable::from_json(const nlohmann::json& j) {
  UnitTable t;
  for (const auto& [family, aliases] : j.at("families").items()) {
    auto& m = t.families[family];
    for (const auto& [alias, factor] : aliases.items()) m[fold(alias)] = factor.get<double>();
  }
  for (const auto& [word, factor] : j.at("magnitudes").items()) t.magnitudes[fold(word)] = factor.get<double>();
  return t;
}

UnitTable UnitTable::load(const std::filesystem::path& path) { return from_json(read_json(path, "unit table")); }

const UnitTable& UnitTable::defaults() {
  static const UnitTable table = from_json(nlohmann::json::parse(embedded::kUnitsJson));
  return table;
}

DirectionalRules DirectionalRules::from_json(const nlohmann::json& j) {
  DirectionalRules r;
  r.higher_words = j.at("higher_words").get<std::vector<std::string>>();
  r.lower_words = j.at("lower_words").get<std::vector<std::string>>();
  for (const auto& item : j.at("rules")) {
    DirectionalRule rule;
    rule.name = item.value("name", std::string{});
    rule.pattern = item.at("pattern").get<std::string>();
    const auto w = item.at("winner").get<std::string>();
    if (w == "higher:X") {
      rule.winner = DirectionalRule::Winner::higher_x;
    } else if (w == "higher:Y") {
      rule.winner = DirectionalRule::Winner::higher_y;
    } else if (w == "chosen:X") {
      rule.winner = DirectionalRule::Winner::chosen_x;
    } else {
      throw ConfigError("directional rule '" + rule.name + "': unknown winner '" + w + "'");
    }
    if (rule.pattern.find("{X}") == std::string::npos) {
      throw ConfigError("directional rule '" + rule.name + "' has no {X} placeholder");
    }
    r.rules.push_back(std::move(rule));
  }
  return r;
}

DirectionalRules DirectionalRules::load(const std::filesystem::path& path) {
  return from_json(read_json(path, "directional rules"));
}

const DirectionalRules& DirectionalRules::defaults() {
  static const DirectionalRules rules = from_json(nlohmann::json::parse(embedded::kDirectionalRulesJson));
  return rules;
}

// ---------------------------------------------------------------------------
// Numeric answers

std::string strip_reasoning(std::string_view text) {
  constexpr std::string_view close = "</think>";
  const auto pos = text.rfind(close);
  if (pos != std::string_view::npos) return std::string(text.substr(pos + close.size()));
  if (text.find("<think>") != std::string_view::npos) return {};
  return std::string(text);
}

std::vector<NumberCandidate> extract_numbers(std::string_view raw, const AttributeSpec& spec, const UnitTable& units,
                                             const std::vector<std::string>& mask_names) {
  std::string text = fold(strip_reasoning(raw));
  for (const auto& name : mask_names) {
    const auto needle = fold(name);
    if (needle.empty()) continue;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + needle.size())) {
      std::fill(text.begin() + static_cast<std::ptrdiff_t>(pos),
                text.begin() + static_cast<std::ptrdiff_t>(pos + needle.size()), ' ');
    }
  }

  const std::map<std::string, double>* family = nullptr;
  double canonical_factor = 1.0;
  if (!spec.unit_family.empty()) {
    auto it = units.families.find(spec.unit_family);
    if (it == units.families.end()) throw ConfigError("unknown unit family '" + spec.unit_family + "'");
    family = &it->second;
    auto c = family->find(fold(spec.canonical_unit));
    if (c == family->end()) {
      throw ConfigError("canonical unit '" + spec.canonical_unit + "' not in family '" + spec.unit_family + "'");
    }
    canonical_factor = c->second;
  }

  // Longest alias starting at `pos`, requiring a word boundary after it.
  auto match_word = [&](const std::map<std::string, double>& table, std::size_t pos) -> std::pair<double, std::size_t> {
    std::pair<double, std::size_t> best{0.0, 0};
    for (const auto& [alias, factor] : table) {
      if (alias.size() <= best.second || text.compare(pos, alias.size(), alias) != 0) continue;
      const auto end = pos + alias.size();
      if (end < text.size() && is_alpha_byte(static_cast<unsigned char>(text[end]))) continue;
      best = {factor, alias.size()};
    }
    return best;
  };
  auto skip_spaces = [&](std::size_t pos) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    return pos;
  };

  std::vector<NumberCandidate> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (!std::isdigit(c) || (i > 0 && is_word_byte(static_cast<unsigned char>(text[i - 1])))) {
      if (std::isdigit(c)) {
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
      } else {
        ++i;
      }
      continue;
    }
    const std::size_t start = i;
    std::string digits;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++];
    // Thousands groups: ",ddd" not followed by another digit.
    auto digit_at = [&](std::size_t k) { return k < text.size() && std::isdigit(static_cast<unsigned char>(text[k])); };
    while (i < text.size() && text[i] == ',' && digit_at(i + 1) && digit_at(i + 2) && digit_at(i + 3) &&
           !digit_at(i + 4)) {
      digits.append(text, i + 1, 3);
      i += 4;
    }
    if (i + 1 < text.size() && text[i] == '.' && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      digits += '.';
      ++i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++];
    }
    double value = std::strtod(digits.c_str(), nullptr);

    std::size_t cursor = skip_spaces(i);
    bool unit_found = false;
    double unit_factor = 1.0;
    if (family) {
      auto [f, len] = match_word(*family, cursor);
      if (len) {
        unit_found = true;
        unit_factor = f;
        cursor += len;
      }
    }
    if (!unit_found) {
      auto [m, len] = match_word(units.magnitudes, cursor);
      if (len) {
        value *= m;
        cursor += len;
        if (family) {
          const auto after = skip_spaces(cursor);
          auto [f, ulen] = match_word(*family, after);
          if (ulen) {
            unit_found = true;
            unit_factor = f;
            cursor = after + ulen;
          }
        }
      }
    }
    if (unit_found) value = value * unit_factor / canonical_factor;
    out.push_back({value, start});
    i = std::max(i, std::min(cursor, text.size()));
  }
  return out;
}

NumericParse parse_numeric(std::string_view text, const AttributeSpec& spec, double gt_value, const UnitTable& units,
                           const std::vector<std::string>& mask_names) {
  NumericParse result;
  const auto candidates = extract_numbers(text, spec, units, mask_names);
  result.candidates_seen = static_cast<int>(candidates.size());
  if (candidates.empty()) return result;
  result.status = ParseStatus::ok;
  if (candidates.size() == 1) {
    result.value = candidates.front().value;
    result.selection_rule = SelectionRule::single;
    return result;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    if (std::abs(candidates[k].value - gt_value) < std::abs(candidates[best].value - gt_value)) best = k;
  }
  result.value = candidates[best].value;
  result.selection_rule = SelectionRule::closest_to_gt;
  result.gt_changed_outcome = candidates[best].value != candidates.front().value;
  return result;
}

// ---------------------------------------------------------------------------
// Fuzzy similarity

double simple_ratio(std::string_view s1, std::string_view s2) {
  if (s1.empty() && s2.empty()) return 100.0;
  if (s1.empty() || s2.empty()) return 0.0;
  std::vector<std::size_t> prev(s2.size() + 1, 0);
  std::vector<std::size_t> cur(s2.size() + 1, 0);
  for (std::size_t i = 1; i <= s1.size(); ++i) {
    for (std::size_t j = 1; j <= s2.size(); ++j) {
      cur[j] = s1[i - 1] == s2[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[s2.size()]);
  return 100.0 * 2.0 * lcs / static_cast<double>(s1.size() + s2.size());
}

double token_set_ratio(std::string_view s1, std::string_view s2) {
  const auto t1v = tokens_of(normalize_tokens(s1));
  const auto t2v = tokens_of(normalize_tokens(s2));
  if (t1v.empty() || t2v.empty()) return 0.0;
  const std::set<std::string> t1(t1v.begin(), t1v.end());
  const std::set<std::string> t2(t2v.begin(), t2v.end());
  std::vector<std::string> inter;
  std::vector<std::string> diff12;
  std::vector<std::string> diff21;
  std::set_intersection(t1.begin(), t1.end(), t2.begin(), t2.end(), std::back_inserter(inter));
  std::set_difference(t1.begin(), t1.end(), t2.begin(), t2.end(), std::back_inserter(diff12));
  std::set_difference(t2.begin(), t2.end(), t1.begin(), t1.end(), std::back_inserter(diff21));
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += ' ';
      out += s;
    }
    return out;
  };
  const auto sect = join(inter);
  auto combine = [&](const std::vector<std::string>& diff) {
    const auto d = join(diff);
    if (sect.empty()) return d;
    return d.empty() ? sect : sect + " " + d;
  };
  const auto c12 = combine(diff12);
  const auto c21 = combine(diff21);
  double best = simple_ratio(c12, c21);
  if (!sect.empty()) {
    best = std::max({best, simple_ratio(sect, c12), simple_ratio(sect, c21)});
  }
  return best;
}

// ---------------------------------------------------------------------------
// Pairwise answers

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::first: return "first";
    case Choice::second: return "second";
    default: return "unknown";
  }
}

std::string_view to_string(ResolutionStep s) {
  switch (s) {
    case ResolutionStep::verbatim: return "verbatim";
    case ResolutionStep::directional: return "directional";
    case ResolutionStep::substring: return "substring";
    case ResolutionStep::fuzzy: return "fuzzy";
    default: return "none";
  }
}

ResolutionStep resolution_step_from_string(std::string_view s) {
  for (auto step : {ResolutionStep::verbatim, ResolutionStep::directional, ResolutionStep::substring,
                    ResolutionStep::fuzzy, ResolutionStep::none}) {
    if (to_string(step) == s) return step;
  }
  throw ConfigError("unknown resolution step '" + std::string(s) + "'");
}

Choice choice_from_string(std::string_view s) {
  if (s == "first") return Choice::first;
  if (s == "second") return Choice::second;
  if (s == "unknown") return Choice::unknown;
  throw ConfigError("unknown choice '" + std::string(s) + "'");
}

namespace {

/// Whole-word occurrences of a name, dropping hits nested inside a hit of
/// the other (longer) name.
bool name_present(const std::string& text, const std::string& name, const std::string& other) {
  auto hits = word_occurrences(text, name);
  if (other.size() > name.size() && other.find(name) != std::string::npos) {
    const auto other_hits = word_occurrences(text, other);
    std::erase_if(hits, [&](const auto& h) {
      return std::any_of(other_hits.begin(), other_hits.end(),
                         [&](const auto& o) { return h.first >= o.first && h.second <= o.second; });
    });
  }
  return !hits.empty();
}

std::optional<Side> directional(const std::string& text, const std::string& a, const std::string& b,
                                Polarity polarity, const DirectionalRules& rules) {
  const auto high = alternation(rules.higher_words);
  const auto low = alternation(rules.lower_words);
  std::optional<Side> verdict;
  bool conflict = false;
  for (const auto& rule : rules.rules) {
    for (Side x_side : {Side::a, Side::b}) {
      const auto& x = x_side == Side::a ? a : b;
      const auto& y = x_side == Side::a ? b : a;
      auto pat = replace_all(rule.pattern, "{HIGH}", high);
      pat = replace_all(pat, "{LOW}", low);
      pat = replace_all(pat, "{X}", regex_escape(x));
      pat = replace_all(pat, "{Y}", regex_escape(y));
      const std::regex re(pat, std::regex::ECMAScript | std::regex::icase);
      if (!std::regex_search(text, re)) continue;
      const Side y_side = x_side == Side::a ? Side::b : Side::a;
      Side chosen = x_side;
      switch (rule.winner) {
        case DirectionalRule::Winner::chosen_x: chosen = x_side; break;
        case DirectionalRule::Winner::higher_x: chosen = polarity == Polarity::negative ? y_side : x_side; break;
        case DirectionalRule::Winner::higher_y: chosen = polarity == Polarity::negative ? x_side : y_side; break;
      }
      if (verdict && *verdict != chosen) conflict = true;
      verdict = chosen;
    }
  }
  if (conflict) return std::nullopt;
  return verdict;
}

std::optional<Side> substring_match(const std::string& answer_norm, const std::string& a_norm,
                                    const std::string& b_norm) {
  std::string response = answer_norm;
  if (response.rfind("the ", 0) == 0) response.erase(0, 4);
  if (response.size() >= 3) {
    auto side = unique_side(contains_word_phrase(a_norm, response), contains_word_phrase(b_norm, response));
    if (side) return side;
  }
  const auto ta = tokens_of(a_norm);
  const auto tb = tokens_of(b_norm);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  auto distinctive_hit = [&](const std::set<std::string>& mine, const std::set<std::string>& theirs) {
    for (const auto& t : mine) {
      if (t.size() < 3 || theirs.count(t) || generic_tokens().count(t)) continue;
      if (contains_word_phrase(answer_norm, t)) return true;
    }
    return false;
  };
  return unique_side(distinctive_hit(sa, sb), distinctive_hit(sb, sa));
}

}  // namespace

PairwiseParse parse_pairwise(std::string_view raw, std::string_view name_a, std::string_view name_b,
                             Ordering ordering, Polarity polarity, const DirectionalRules& rules,
                             const PairwiseParseOptions& options) {
  PairwiseParse result;
  const auto text = fold(strip_reasoning(raw));
  const auto a = fold(trim(name_a));
  const auto b = fold(trim(name_b));
  if (a.empty() || b.empty()) throw std::invalid_argument("parse_pairwise: entity names must be nonempty");
  if (trim(text).empty()) return result;

  auto resolve = [&](Side side, ResolutionStep step) {
    result.choice = to_choice(slot_of_side(ordering, side));
    result.resolution_step = step;
    return result;
  };

  const bool has_a = name_present(text, a, b);
  const bool has_b = name_present(text, b, a);
  if (has_a != has_b) return resolve(has_a ? Side::a : Side::b, ResolutionStep::verbatim);
  if (has_a && has_b) {
    if (auto side = directional(text, a, b, polarity, rules)) return resolve(*side, ResolutionStep::directional);
  }

  const auto answer_norm = normalize_tokens(text);
  const auto a_norm = normalize_tokens(a);
  const auto b_norm = normalize_tokens(b);
  if (!answer_norm.empty()) {
    if (auto side = substring_match(answer_norm, a_norm, b_norm)) return resolve(*side, ResolutionStep::substring);

    const double sa = token_set_ratio(answer_norm, a_norm);
    const double sb = token_set_ratio(answer_norm, b_norm);
    const double best = std::max(sa, sb);
    if (best >= options.fuzzy_threshold && std::abs(sa - sb) >= options.fuzzy_margin) {
      return resolve(sa > sb ? Side::a : Side::b, ResolutionStep::fuzzy);
    }
  }
  return result;
}

}  // namespace cueaudit
