#include "cueaudit/prompting.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "cueaudit/errors.hpp"
#include "cueaudit/rng.hpp"

namespace cueaudit {

namespace {

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

}  // namespace

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    default: return "none";
  }
}
std::string_view to_string(Ordering o) { return o == Ordering::ab ? "ab" : "ba"; }
std::string_view to_string(Mode m) { return m == Mode::plain ? "plain" : "thinking"; }
std::string_view to_string(Slot s) { return s == Slot::first ? "first" : "second"; }

Polarity polarity_from_string(std::string_view s) {
  if (s == "positive") return Polarity::positive;
  if (s == "negative") return Polarity::negative;
  if (s == "none" || s == "n/a" || s.empty()) return Polarity::none;
  throw ConfigError("unknown polarity '" + std::string(s) + "'");
}
Ordering ordering_from_string(std::string_view s) {
  if (s == "ab") return Ordering::ab;
  if (s == "ba") return Ordering::ba;
  throw ConfigError("unknown ordering '" + std::string(s) + "'");
}
Mode mode_from_string(std::string_view s) {
  if (s == "plain") return Mode::plain;
  if (s == "thinking") return Mode::thinking;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

void PromptTemplate::validate() const {
  const auto where = "template '" + template_id + "': ";
  if (template_id.empty() || dataset_name.empty()) throw ValidationError("template missing id or dataset");
  if (kind == TemplateKind::pairwise) {
    if (count_occurrences(body, "{entity1}") != 1 || count_occurrences(body, "{entity2}") != 1) {
      throw ValidationError(where + "pairwise body needs {entity1} and {entity2} exactly once");
    }
    if (polarity == Polarity::none) throw ValidationError(where + "pairwise template needs a polarity");
  } else {
    if (count_occurrences(body, "{entity}") != 1) {
      throw ValidationError(where + "numeric body needs {entity} exactly once");
    }
    if (polarity != Polarity::none) throw ValidationError(where + "numeric template cannot carry a polarity");
  }
}

TemplateRegistry TemplateRegistry::from_json(const nlohmann::json& j) {
  TemplateRegistry reg;
  for (const auto& item : j.at("templates")) {
    PromptTemplate t;
    t.template_id = item.at("id").get<std::string>();
    t.dataset_name = item.at("dataset").get<std::string>();
    const auto kind = item.at("kind").get<std::string>();
    if (kind == "pairwise") {
      t.kind = TemplateKind::pairwise;
    } else if (kind == "numeric") {
      t.kind = TemplateKind::numeric;
    } else {
      throw ConfigError("template " + t.template_id + ": unknown kind '" + kind + "'");
    }
    t.polarity = polarity_from_string(item.value("polarity", std::string{"none"}));
    t.body = item.at("body").get<std::string>();
    reg.add(std::move(t));
  }
  return reg;
}

TemplateRegistry TemplateRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open template registry: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("template registry " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void TemplateRegistry::add(PromptTemplate t) {
  t.validate();
  if (by_id_.count(t.template_id)) throw ValidationError("duplicate template id " + t.template_id);
  by_id_.emplace(t.template_id, templates_.size());
  templates_.push_back(std::move(t));
}

std::vector<const PromptTemplate*> TemplateRegistry::pairwise(const std::string& dataset) const {
  std::vector<const PromptTemplate*> pos;
  std::vector<const PromptTemplate*> neg;
  for (const auto& t : templates_) {
    if (t.dataset_name != dataset || t.kind != TemplateKind::pairwise) continue;
    (t.polarity == Polarity::positive ? pos : neg).push_back(&t);
  }
  if (pos.size() != 3 || neg.size() != 3) {
    throw ConfigError("dataset '" + dataset + "' needs 3 positive and 3 negative pairwise templates, found " +
                      std::to_string(pos.size()) + "/" + std::to_string(neg.size()));
  }
  pos.insert(pos.end(), neg.begin(), neg.end());
  return pos;
}

std::vector<const PromptTemplate*> TemplateRegistry::numeric(const std::string& dataset) const {
  std::vector<const PromptTemplate*> out;
  for (const auto& t : templates_) {
    if (t.dataset_name == dataset && t.kind == TemplateKind::numeric) out.push_back(&t);
  }
  if (out.size() != 3) {
    throw ConfigError("dataset '" + dataset + "' needs 3 numeric templates, found " + std::to_string(out.size()));
  }
  return out;
}

const PromptTemplate* TemplateRegistry::find(const std::string& template_id) const {
  auto it = by_id_.find(template_id);
  return it == by_id_.end() ? nullptr : &templates_[it->second];
}

std::vector<std::string> TemplateRegistry::datasets() const {
  std::set<std::string> names;
  for (const auto& t : templates_) names.insert(t.dataset_name);
  return {names.begin(), names.end()};
}

std::string substitute(std::string_view body, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(body.size() + 32);
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      const auto close = body.find('}', i);
      if (close != std::string_view::npos) {
        const std::string key(body.substr(i + 1, close - i - 1));
        auto it = values.find(key);
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += body[i++];
  }
  return out;
}

ComparisonJob apply_thinking(ComparisonJob job, std::string_view marker) {
  if (job.mode == Mode::thinking) throw std::logic_error("apply_thinking: job is already in thinking mode");
  job.mode = Mode::thinking;
  job.user_text += marker;
  job.max_new_tokens = kThinkingMaxNewTokens;
  return job;
}

ComparisonJob render_one(const std::string& dataset, const ComparisonPair& pair, const PromptTemplate& tmpl,
                         Ordering ordering, Mode mode, std::string_view thinking_marker) {
  ComparisonJob job;
  job.dataset = dataset;
  job.pair = pair;
  job.template_id = tmpl.template_id;
  job.ordering = ordering;
  job.polarity = tmpl.polarity;
  job.system_text = std::string(kSystemPrompt);
  job.user_text = substitute(tmpl.body, {{"entity1", job.entity_in(Slot::first).display_name},
                                         {"entity2", job.entity_in(Slot::second).display_name}});
  if (mode == Mode::thinking) job = apply_thinking(std::move(job), thinking_marker);
  return job;
}

std::vector<ComparisonJob> render_pairwise(const std::string& dataset, const ComparisonPair& pair,
                                           const TemplateRegistry& registry, Mode mode,
                                           std::string_view thinking_marker) {
  if (registry.empty()) throw ConfigError("template registry is empty");
  std::vector<ComparisonJob> jobs;
  jobs.reserve(12);
  for (const auto* tmpl : registry.pairwise(dataset)) {
    for (auto ordering : {Ordering::ab, Ordering::ba}) {
      jobs.push_back(render_one(dataset, pair, *tmpl, ordering, mode, thinking_marker));
    }
  }
  return jobs;
}

std::vector<NumericJob> render_numeric(const std::string& dataset, const EntityRecord& entity,
                                       const TemplateRegistry& registry) {
  if (registry.empty()) throw ConfigError("template registry is empty");
  std::vector<NumericJob> jobs;
  for (const auto* tmpl : registry.numeric(dataset)) {
    NumericJob job;
    job.dataset = dataset;
    job.entity = entity;
    job.template_id = tmpl->template_id;
    job.system_text = std::string(kSystemPrompt);
    job.user_text = substitute(tmpl->body, {{"entity", entity.display_name}});
    jobs.push_back(std::move(job));
  }
  return jobs;
}

const std::string& user_text(const Job& job) {
  return std::visit([](const auto& j) -> const std::string& { return j.user_text; }, job);
}
const std::string& system_text(const Job& job) {
  return std::visit([](const auto& j) -> const std::string& { return j.system_text; }, job);
}
int max_new_tokens(const Job& job) {
  return std::visit([](const auto& j) { return j.max_new_tokens; }, job);
}

std::uint64_t content_hash(const Job& job) {
  auto h = fnv1a64(system_text(job));
  h = fnv1a64("\x1f", h);
  return fnv1a64(user_text(job), h);
}

nlohmann::json to_json(const ComparisonJob& job) {
  return {{"dataset", job.dataset},
          {"pair", to_json(job.pair)},
          {"template_id", job.template_id},
          {"ordering", to_string(job.ordering)},
          {"polarity", to_string(job.polarity)},
          {"mode", to_string(job.mode)},
          {"user_text", job.user_text},
          {"system_text", job.system_text},
          {"max_new_tokens", job.max_new_tokens}};
}

ComparisonJob comparison_job_from_json(const nlohmann::json& j) {
  ComparisonJob job;
  job.dataset = j.at("dataset").get<std::string>();
  job.pair = pair_from_json(j.at("pair"));
  job.template_id = j.at("template_id").get<std::string>();
  job.ordering = ordering_from_string(j.at("ordering").get<std::string>());
  job.polarity = polarity_from_string(j.at("polarity").get<std::string>());
  job.mode = mode_from_string(j.at("mode").get<std::string>());
  job.user_text = j.at("user_text").get<std::string>();
  job.system_text = j.at("system_text").get<std::string>();
  job.max_new_tokens = j.at("max_new_tokens").get<int>();
  return job;
}

nlohmann::json to_json(const NumericJob& job) {
  return {{"dataset", job.dataset},         {"entity", to_json(job.entity)},
          {"template_id", job.template_id}, {"user_text", job.user_text},
          {"system_text", job.system_text}, {"max_new_tokens", job.max_new_tokens}};
}

NumericJob numeric_job_from_json(const nlohmann::json& j) {
  NumericJob job;
  job.dataset = j.at("dataset").get<std::string>();
  job.entity = entity_from_json(j.at("entity"));
  job.template_id = j.at("template_id").get<std::string>();
  job.user_text = j.at("user_text").get<std::string>();
  job.system_text = j.at("system_text").get<std::string>();
  job.max_new_tokens = j.at("max_new_tokens").get<int>();
  return job;
}

}  // namespace cueaudit
