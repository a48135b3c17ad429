#include "cueaudit/mock.hpp"

#include "cueaudit/rng.hpp"
#include "cueaudit/text.hpp"

namespace cueaudit {

namespace {

std::optional<double> lookup(const std::map<std::string, double>& table, const std::string& dataset,
                             const std::string& entity_id) {
  if (auto it = table.find(dataset + "/" + entity_id); it != table.end()) return it->second;
  if (auto it = table.find(entity_id); it != table.end()) return it->second;
  return std::nullopt;
}

// Slot preferred by a pair of scores; nullopt on a tie.
std::optional<Slot> higher_slot(double first, double second) {
  if (first == second) return std::nullopt;
  return first > second ? Slot::first : Slot::second;
}

std::vector<double> pseudo_logprobs(Rng& rng, std::size_t n_chars) {
  std::vector<double> lps(1 + n_chars / 4);
  for (auto& lp : lps) lp = -(0.02 + 0.6 * rng.uniform());
  return lps;
}

Completion complete_pairwise(const ComparisonJob& job, const MockProfile& p, Rng& rng) {
  const EntityRecord& first = job.entity_in(Slot::first);
  const EntityRecord& second = job.entity_in(Slot::second);
  std::optional<Slot> cue;
  switch (p.kind) {
    case MockProfile::Kind::numbers_faithful: {
      const auto v1 = p.table_value(job.dataset, first.entity_id);
      const auto v2 = p.table_value(job.dataset, second.entity_id);
      if (!v1 || !v2) throw ConfigError("mock " + p.name + ": no table value for " + (v1 ? second : first).entity_id);
      cue = higher_slot(*v1, *v2);
      if (cue && job.polarity == Polarity::negative) cue = flip(*cue);
      break;
    }
    case MockProfile::Kind::position_follower:
      cue = p.preferred_slot;
      break;
    case MockProfile::Kind::popularity_follower:
      cue = higher_slot(static_cast<double>(first.qrank), static_cast<double>(second.qrank));
      break;
    case MockProfile::Kind::cooccurrence_follower: {
      const auto s1 = p.association_value(job.dataset, first.entity_id);
      const auto s2 = p.association_value(job.dataset, second.entity_id);
      if (s1 && s2) cue = higher_slot(*s1, *s2);
      break;
    }
    case MockProfile::Kind::uniform_noise:
      break;
  }
  const double u = rng.uniform();
  Slot pick;
  if (cue) {
    pick = u < p.obedience ? *cue : flip(*cue);
  } else {
    pick = u < 0.5 ? Slot::first : Slot::second;
  }
  const std::string& name = job.entity_in(pick).display_name;

  Completion c;
  if (job.mode == Mode::thinking) {
    const std::string musing = "Let me compare " + first.display_name + " and " + second.display_name + ". ";
    if (rng.uniform() < p.thinking_overflow_rate) {
      for (int i = 0; i < 8; ++i) c.text += musing;
      c.finish_reason = FinishReason::length;
    } else {
      c.text = musing + "\n</think>\n\n" + name;
    }
  } else {
    c.text = name;
  }
  c.token_logprobs = pseudo_logprobs(rng, c.text.size());
  return c;
}

Completion complete_numeric(const NumericJob& job, const MockProfile& p, Rng& rng) {
  Completion c;
  if (const auto v = p.table_value(job.dataset, job.entity.entity_id)) {
    c.text = format_number(*v);
  } else if (p.kind == MockProfile::Kind::numbers_faithful) {
    throw ConfigError("mock " + p.name + ": no table value for " + job.entity.entity_id);
  } else {
    c.text = "I am not sure.";
  }
  c.token_logprobs = pseudo_logprobs(rng, c.text.size());
  return c;
}

}  // namespace

void MockProfile::validate() const {
  if (!(obedience >= 0.0 && obedience <= 1.0)) throw ConfigError("mock " + name + ": obedience must be in [0,1]");
  if (!(thinking_overflow_rate >= 0.0 && thinking_overflow_rate <= 1.0))
    throw ConfigError("mock " + name + ": thinking_overflow_rate must be in [0,1]");
  if (kind == Kind::numbers_faithful && internal_table.empty())
    throw ConfigError("mock " + name + ": numbers_faithful needs an internal table");
}

std::optional<double> MockProfile::table_value(const std::string& dataset, const std::string& entity_id) const {
  return lookup(internal_table, dataset, entity_id);
}

std::optional<double> MockProfile::association_value(const std::string& dataset,
                                                     const std::string& entity_id) const {
  return lookup(association, dataset, entity_id);
}

std::string_view to_string(MockProfile::Kind k) {
  switch (k) {
    case MockProfile::Kind::numbers_faithful: return "numbers_faithful";
    case MockProfile::Kind::position_follower: return "position_follower";
    case MockProfile::Kind::popularity_follower: return "popularity_follower";
    case MockProfile::Kind::cooccurrence_follower: return "cooccurrence_follower";
    case MockProfile::Kind::uniform_noise: return "uniform_noise";
  }
  return "uniform_noise";
}

MockProfile::Kind mock_kind_from_string(std::string_view s) {
  for (auto k : {MockProfile::Kind::numbers_faithful, MockProfile::Kind::position_follower,
                 MockProfile::Kind::popularity_follower, MockProfile::Kind::cooccurrence_follower,
                 MockProfile::Kind::uniform_noise}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown mock kind: " + std::string(s));
}

nlohmann::json to_json(const MockProfile& p) {
  return nlohmann::json{{"name", p.name},
                        {"kind", to_string(p.kind)},
                        {"obedience", p.obedience},
                        {"preferred_slot", to_string(p.preferred_slot)},
                        {"internal_table", p.internal_table},
                        {"association", p.association},
                        {"seed", p.seed},
                        {"thinking_overflow_rate", p.thinking_overflow_rate}};
}

MockProfile mock_profile_from_json(const nlohmann::json& j) {
  MockProfile p;
  p.name = j.value("name", "mock");
  p.kind = mock_kind_from_string(j.at("kind").get<std::string>());
  p.obedience = j.value("obedience", 1.0);
  const std::string slot = j.value("preferred_slot", "first");
  if (slot != "first" && slot != "second") throw ConfigError("preferred_slot must be first or second");
  p.preferred_slot = slot == "first" ? Slot::first : Slot::second;
  if (j.contains("internal_table")) p.internal_table = j["internal_table"].get<std::map<std::string, double>>();
  if (j.contains("association")) p.association = j["association"].get<std::map<std::string, double>>();
  p.seed = j.value("seed", std::uint64_t{0});
  p.thinking_overflow_rate = j.value("thinking_overflow_rate", 0.0);
  p.validate();
  return p;
}

Completion mock_complete(const Job& job, const MockProfile& profile, const DecodingConfig& cfg) {
  Rng rng(derive_seed(profile.seed, content_hash(job)));
  Completion c = std::holds_alternative<ComparisonJob>(job)
                     ? complete_pairwise(std::get<ComparisonJob>(job), profile, rng)
                     : complete_numeric(std::get<NumericJob>(job), profile, rng);
  (void)cfg;
  return c;
}

Completion mock_complete(const Job& job, const MockProfile& profile) {
  return mock_complete(job, profile, decoding_for(job));
}

MockBackend::MockBackend(MockProfile profile) : profile_(std::move(profile)) {
  profile_.validate();
  id_ = "mock:" + profile_.name + ":" + hex64(fnv1a64(to_json(profile_).dump()));
}

Completion MockBackend::complete(const Job& job, const DecodingConfig& cfg) {
  return mock_complete(job, profile_, cfg);
}

}  // namespace cueaudit
