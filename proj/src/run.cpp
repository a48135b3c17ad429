#include "cueaudit/run.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cueaudit/defaults.hpp"
#include "cueaudit/log.hpp"
#include "cueaudit/rng.hpp"
#include "cueaudit/text.hpp"

namespace cueaudit {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<fs::path> opt_path(const nlohmann::json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return resolve(base, j[key].get<std::string>());
}

std::map<std::string, double> read_key_values(const fs::path& path) {
  const Table t = Table::load(path);
  const std::size_t k = t.column("key");
  const std::size_t v = t.column("value");
  std::map<std::string, double> out;
  for (const auto& row : t.rows) out[row[k]] = std::stod(row[v]);
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  out << content;
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string hash_string(const std::string& s) { return hex64(fnv1a64(s)); }

}  // namespace

std::string file_hash(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return hash_string(read_file(path));
}

// ---- config --------------------------------------------------------------------

RunConfig RunConfig::from_json(const nlohmann::json& j, const fs::path& base) {
  RunConfig c;
  try {
    c.run_id = j.value("run_id", c.run_id);
    if (c.run_id.empty() || c.run_id.find_first_of("/\\") != std::string::npos)
      throw ConfigError("run_id must be a non-empty plain name");
    c.output_dir = resolve(base, j.value("output_dir", std::string("runs")));
    c.cache_dir = resolve(base, j.value("cache_dir", std::string("cache")));
    c.seed = j.value("seed", std::uint64_t{0});
    c.mode = mode_from_string(j.value("mode", std::string("plain")));
    c.thinking_marker = j.value("thinking_marker", c.thinking_marker);
    c.templates = opt_path(j, "templates", base);
    c.attributes = opt_path(j, "attributes", base);
    c.embeddings = opt_path(j, "embeddings", base);
    c.units = opt_path(j, "units", base);
    c.directional_rules = opt_path(j, "directional_rules", base);
    if (j.contains("decoding")) c.temperature = j["decoding"].value("temperature", 0.0);
    if (j.contains("gateway")) {
      const auto& g = j["gateway"];
      c.gateway.max_in_flight = g.value("max_in_flight", c.gateway.max_in_flight);
      c.gateway.max_attempts = g.value("max_attempts", c.gateway.max_attempts);
      c.gateway.backoff_ms = g.value("backoff_ms", c.gateway.backoff_ms);
    }
    if (j.contains("bootstrap")) {
      const auto& b = j["bootstrap"];
      c.bootstrap.n_resamples = b.value("n_resamples", c.bootstrap.n_resamples);
      c.bootstrap.threads = b.value("threads", c.bootstrap.threads);
      const std::string unit = b.value("unit", std::string("block"));
      if (unit != "block" && unit != "record") throw ConfigError("bootstrap.unit must be block or record");
      c.bootstrap.unit = unit == "block" ? BootstrapUnit::block : BootstrapUnit::record;
    }
    for (const auto& d : j.at("datasets")) {
      DatasetConfig dc;
      dc.name = d.at("name").get<std::string>();
      dc.catalog = resolve(base, d.at("catalog").get<std::string>());
      if (d.contains("max_entities")) dc.max_entities = d["max_entities"].get<std::size_t>();
      c.datasets.push_back(std::move(dc));
    }
    std::set<std::string> names;
    for (const auto& m : j.at("models")) {
      ModelConfig mc;
      mc.name = m.at("name").get<std::string>();
      if (mc.name.empty() || !names.insert(mc.name).second)
        throw ConfigError("model names must be unique and non-empty");
      mc.backend = m.value("backend", std::string("mock"));
      if (mc.backend == "mock") {
        nlohmann::json pj = m.at("mock");
        pj["name"] = mc.name;
        if (!pj.contains("seed")) pj["seed"] = derive_seed(c.seed, "mock/" + mc.name);
        MockProfile p = mock_profile_from_json(pj.contains("internal_table_csv") &&
                                                       !pj.contains("internal_table")
                                                   ? [&] {
                                                       auto copy = pj;
                                                       copy["internal_table"] = read_key_values(
                                                           resolve(base, pj["internal_table_csv"]));
                                                       return copy;
                                                     }()
                                                   : pj);
        if (pj.contains("association_csv"))
          p.association = read_key_values(resolve(base, pj["association_csv"].get<std::string>()));
        mc.mock = std::move(p);
      } else if (mc.backend == "http") {
        const auto& h = m.at("http");
        HttpBackendConfig hc;
        hc.base_url = h.value("base_url", hc.base_url);
        hc.model = h.at("model").get<std::string>();
        hc.api_key_env = h.value("api_key_env", hc.api_key_env);
        hc.timeout_seconds = h.value("timeout_seconds", hc.timeout_seconds);
        hc.request_logprobs = h.value("logprobs", true);
        mc.http = std::move(hc);
      } else {
        throw ConfigError("model " + mc.name + ": backend must be mock or http");
      }
      c.models.push_back(std::move(mc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.datasets.empty()) throw ConfigError("config lists no datasets");
  if (c.models.empty()) throw ConfigError("config lists no models");
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

nlohmann::json RunConfig::to_json() const {
  auto p = [](const std::optional<fs::path>& x) { return x ? nlohmann::json(x->string()) : nlohmann::json(nullptr); };
  nlohmann::json datasets_j = nlohmann::json::array();
  for (const auto& d : datasets) {
    nlohmann::json dj{{"name", d.name}, {"catalog", d.catalog.string()}};
    if (d.max_entities) dj["max_entities"] = *d.max_entities;
    datasets_j.push_back(dj);
  }
  nlohmann::json models_j = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json mj{{"name", m.name}, {"backend", m.backend}};
    if (m.mock) {
      mj["mock"] = {{"kind", to_string(m.mock->kind)},
                    {"obedience", m.mock->obedience},
                    {"preferred_slot", to_string(m.mock->preferred_slot)},
                    {"seed", m.mock->seed},
                    {"thinking_overflow_rate", m.mock->thinking_overflow_rate},
                    {"internal_table_entries", m.mock->internal_table.size()},
                    {"association_entries", m.mock->association.size()}};
    }
    if (m.http) mj["http"] = {{"base_url", m.http->base_url}, {"model", m.http->model}};
    models_j.push_back(mj);
  }
  return {{"run_id", run_id},
          {"seed", seed},
          {"mode", to_string(mode)},
          {"thinking_marker", thinking_marker},
          {"templates", p(templates)},
          {"attributes", p(attributes)},
          {"embeddings", p(embeddings)},
          {"units", p(units)},
          {"directional_rules", p(directional_rules)},
          {"datasets", datasets_j},
          {"models", models_j},
          {"decoding", {{"temperature", temperature}}},
          {"bootstrap",
           {{"n_resamples", bootstrap.n_resamples}, {"unit", bootstrap.unit == BootstrapUnit::block ? "block" : "record"}}}};
}

// ---- run -----------------------------------------------------------------------

struct Run::Resources {
  std::map<std::string, AttributeSpec> specs;
  TemplateRegistry templates;
  UnitTable units;
  DirectionalRules rules;
  std::map<std::string, EntityCatalog> catalogs;
  std::optional<EmbeddingStore> embeddings;
  std::string templates_hash;
  std::string embeddings_hash;
  std::string parsing_hash;
};

Run::Run(RunConfig config) : config_(std::move(config)) {
  auto res = std::make_shared<Resources>();
  res->specs = config_.attributes ? load_attribute_specs(*config_.attributes) : builtin_attribute_specs();
  res->templates = config_.templates ? TemplateRegistry::load(*config_.templates) : builtin_templates();
  res->templates_hash = config_.templates ? file_hash(*config_.templates) : "builtin";
  res->units = config_.units ? UnitTable::load(*config_.units) : UnitTable::defaults();
  res->rules = config_.directional_rules ? DirectionalRules::load(*config_.directional_rules) : DirectionalRules::defaults();
  res->parsing_hash = (config_.units ? file_hash(*config_.units) : "builtin") + "/" +
                      (config_.directional_rules ? file_hash(*config_.directional_rules) : "builtin");

  std::set<std::string> seen;
  for (const auto& d : config_.datasets) {
    if (!seen.insert(d.name).second) throw ConfigError("dataset " + d.name + " listed twice");
    const auto spec = res->specs.find(d.name);
    if (spec == res->specs.end()) throw ConfigError("dataset " + d.name + " has no attribute spec");
    res->templates.pairwise(d.name);
    res->templates.numeric(d.name);
    if (!fs::exists(d.catalog)) throw ConfigError("dataset " + d.name + ": catalog not found: " + d.catalog.string());
    EntityCatalog cat = load_catalog(d.catalog, spec->second);
    if (d.max_entities) cat = cat.top_by_popularity(*d.max_entities);
    res->catalogs.emplace(d.name, std::move(cat));
  }
  if (config_.embeddings) {
    if (!fs::exists(*config_.embeddings))
      throw ConfigError("embeddings not found: " + config_.embeddings->string());
    res->embeddings = EmbeddingStore::load(*config_.embeddings);
    res->embeddings_hash = file_hash(*config_.embeddings);
  } else {
    log::warn("no embeddings configured; the co-occurrence cue will be undefined");
  }
  for (const auto& m : config_.models) make_backend(m);  // validates backend settings
  res_ = std::move(res);

  run_dir_ = config_.output_dir / config_.run_id;
  fs::create_directories(run_dir_);
  const fs::path mpath = run_dir_ / "manifest.json";
  if (fs::exists(mpath)) {
    try {
      manifest_ = nlohmann::json::parse(read_file(mpath));
    } catch (const nlohmann::json::exception&) {
      log::warn("manifest unreadable; starting fresh");
      manifest_ = nlohmann::json::object();
    }
  }
  if (!manifest_.is_object()) manifest_ = nlohmann::json::object();
  manifest_["run_id"] = config_.run_id;
  manifest_["config"] = config_.to_json();
  nlohmann::json seeds{{"root", config_.seed}};
  for (const auto& d : config_.datasets) seeds["sample"][d.name] = derive_seed(config_.seed, "sample/" + d.name);
  for (const auto& m : config_.models) {
    seeds["bos"][m.name] = derive_seed(config_.seed, "bos/" + m.name);
    if (m.mock) seeds["mock"][m.name] = m.mock->seed;
  }
  manifest_["seeds"] = seeds;
  nlohmann::json backends = nlohmann::json::object();
  for (const auto& m : config_.models) backends[m.name] = make_backend(m)->id();
  manifest_["backends"] = backends;
  if (!manifest_.contains("stages")) manifest_["stages"] = nlohmann::json::object();
  save_manifest();
}

std::unique_ptr<Backend> Run::make_backend(const ModelConfig& m) const {
  if (m.mock) return std::make_unique<MockBackend>(*m.mock);
  if (m.http) return make_http_backend(*m.http);
  throw ConfigError("model " + m.name + " has no backend settings");
}

void Run::save_manifest() const { write_file(run_dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

bool Run::up_to_date(const std::string& stage, const std::string& input_hash) const {
  const auto& stages = manifest_["stages"];
  if (!stages.contains(stage)) return false;
  const auto& s = stages[stage];
  if (s.value("input_hash", "") != input_hash) return false;
  for (const auto& [rel, h] : s["outputs"].items())
    if (file_hash(run_dir_ / rel) != h.get<std::string>()) return false;
  return true;
}

void Run::finish_stage(const std::string& stage, const std::string& input_hash,
                       const std::vector<fs::path>& outputs) {
  nlohmann::json outs = nlohmann::json::object();
  for (const auto& p : outputs) outs[fs::relative(p, run_dir_).generic_string()] = file_hash(p);
  manifest_["stages"][stage] = {{"input_hash", input_hash}, {"outputs", outs}};
  manifest_["last_good_stage"] = stage;
  save_manifest();
}

std::string Run::output_hash(const std::string& stage) const {
  if (!manifest_["stages"].contains(stage)) return {};
  return hash_string(manifest_["stages"][stage]["outputs"].dump());
}

void Run::require_stage(const std::string& stage) const {
  if (!manifest_["stages"].contains(stage))
    throw Error("stage '" + stage + "' has not completed for run " + config_.run_id + "; run `cueaudit " + stage +
                "` first");
  for (const auto& [rel, h] : manifest_["stages"][stage]["outputs"].items())
    if (file_hash(run_dir_ / rel) != h.get<std::string>())
      throw Error("output " + rel + " of stage '" + stage + "' is missing or changed; rerun `cueaudit " + stage + "`");
}

void Run::sample() {
  nlohmann::json in{{"seed", config_.seed}};
  for (const auto& d : config_.datasets)
    in[d.name] = {file_hash(d.catalog), d.max_entities ? static_cast<long long>(*d.max_entities) : -1};
  const std::string input_hash = hash_string(in.dump());
  if (up_to_date("sample", input_hash)) {
    ++stages_skipped_;
    return;
  }
  std::vector<fs::path> outputs;
  for (const auto& d : config_.datasets) {
    SamplingReport rep;
    const auto pairs = stratified_sample_pairs(res_->catalogs.at(d.name), derive_seed(config_.seed, "sample/" + d.name), &rep);
    std::string body;
    for (const auto& p : pairs) body += to_json(p).dump() + "\n";
    const fs::path out = run_dir_ / "pairs" / (d.name + ".jsonl");
    write_file(out, body);
    outputs.push_back(out);
    log::info(d.name + ": " + std::to_string(pairs.size()) + " pairs from " + std::to_string(rep.anchors) + " anchors");
  }
  finish_stage("sample", input_hash, outputs);
}

void Run::render() {
  require_stage("sample");
  const std::string input_hash = hash_string(output_hash("sample") + "|" + res_->templates_hash + "|" +
                                             std::string(to_string(config_.mode)) + "|" + config_.thinking_marker);
  if (up_to_date("render", input_hash)) {
    ++stages_skipped_;
    return;
  }
  std::string comparison, numeric;
  for (const auto& d : config_.datasets) {
    std::set<std::string> rendered;
    for (const auto& pj : read_jsonl(run_dir_ / "pairs" / (d.name + ".jsonl"))) {
      const ComparisonPair pair = pair_from_json(pj);
      for (const auto& job : render_pairwise(d.name, pair, res_->templates, config_.mode, config_.thinking_marker))
        comparison += to_json(job).dump() + "\n";
      for (const auto* e : {&pair.entity_a, &pair.entity_b}) {
        if (!rendered.insert(e->entity_id).second) continue;
        for (const auto& job : render_numeric(d.name, *e, res_->templates)) numeric += to_json(job).dump() + "\n";
      }
    }
  }
  const fs::path c = run_dir_ / "jobs" / "comparison.jsonl";
  const fs::path n = run_dir_ / "jobs" / "numeric.jsonl";
  write_file(c, comparison);
  write_file(n, numeric);
  finish_stage("render", input_hash, {c, n});
}

void Run::query() {
  require_stage("render");
  nlohmann::json in{{"render", output_hash("render")}, {"temperature", config_.temperature}};
  for (const auto& m : config_.models) in["backends"].push_back(make_backend(m)->id());
  const std::string input_hash = hash_string(in.dump());
  if (up_to_date("query", input_hash)) {
    ++stages_skipped_;
    return;
  }
  std::vector<Job> jobs;
  for (const auto& j : read_jsonl(run_dir_ / "jobs" / "comparison.jsonl")) jobs.emplace_back(comparison_job_from_json(j));
  const std::size_t n_comparison = jobs.size();
  for (const auto& j : read_jsonl(run_dir_ / "jobs" / "numeric.jsonl")) jobs.emplace_back(numeric_job_from_json(j));

  ResponseCache cache(config_.cache_dir / "responses.jsonl");
  std::vector<fs::path> outputs;
  for (const auto& m : config_.models) {
    auto backend = make_backend(m);
    Gateway gateway(*backend, &cache, config_.gateway);
    const auto completions = gateway.complete_all(jobs, config_.temperature);
    const auto st = gateway.stats();
    backend_calls_ += st.requests - st.cache_hits;
    if (st.failures) log::warn(m.name + ": " + std::to_string(st.failures) + " jobs failed");
    std::string body;
    for (std::size_t i = 0; i < completions.size(); ++i) {
      body += nlohmann::json{{"i", i},
                             {"kind", i < n_comparison ? "comparison" : "numeric"},
                             {"completion", to_json(completions[i])}}
                  .dump() +
              "\n";
    }
    const fs::path out = run_dir_ / "completions" / (m.name + ".jsonl");
    write_file(out, body);
    outputs.push_back(out);
  }
  finish_stage("query", input_hash, outputs);
}

void Run::parse() {
  require_stage("query");
  const std::string input_hash =
      hash_string(output_hash("query") + "|" + res_->embeddings_hash + "|" + res_->parsing_hash);
  if (up_to_date("parse", input_hash)) {
    ++stages_skipped_;
    return;
  }
  std::vector<ComparisonJob> cjobs;
  for (const auto& j : read_jsonl(run_dir_ / "jobs" / "comparison.jsonl")) cjobs.push_back(comparison_job_from_json(j));
  std::vector<NumericJob> njobs;
  for (const auto& j : read_jsonl(run_dir_ / "jobs" / "numeric.jsonl")) njobs.push_back(numeric_job_from_json(j));

  std::map<std::string, std::map<std::string, double>> cooc;
  if (res_->embeddings)
    for (const auto& [name, cat] : res_->catalogs) cooc[name] = cooccurrence_scores(cat, *res_->embeddings);

  std::vector<fs::path> outputs;
  for (const auto& m : config_.models) {
    const auto lines = read_jsonl(run_dir_ / "completions" / (m.name + ".jsonl"));
    if (lines.size() != cjobs.size() + njobs.size())
      throw LoadError("completions for " + m.name + " do not match the rendered jobs; rerun query");
    std::vector<Completion> comps;
    for (const auto& l : lines) comps.push_back(completion_from_json(l.at("completion")));

    // Numeric jobs are grouped per entity, in render order.
    std::vector<NumexResult> numex;
    std::map<std::string, std::map<std::string, NumexResult>> numex_by;
    for (std::size_t i = 0; i < njobs.size();) {
      std::size_t k = i;
      while (k < njobs.size() && njobs[k].dataset == njobs[i].dataset &&
             njobs[k].entity.entity_id == njobs[i].entity.entity_id)
        ++k;
      const auto& spec = res_->catalogs.at(njobs[i].dataset).spec();
      auto r = select_numex(m.name, spec, njobs[i].entity, std::span(njobs).subspan(i, k - i),
                            std::span(comps).subspan(cjobs.size() + i, k - i), res_->units);
      numex_by[r.dataset][r.entity_id] = r;
      numex.push_back(std::move(r));
      i = k;
    }

    std::vector<AnalysisRecord> records;
    records.reserve(cjobs.size());
    static const std::map<std::string, double> kNoCooc;
    static const std::map<std::string, NumexResult> kNoNumex;
    for (std::size_t i = 0; i < cjobs.size(); ++i) {
      AnalysisRecord r = make_record(m.name, cjobs[i], parse_completion(cjobs[i], comps[i], res_->rules));
      const auto ni = numex_by.find(r.dataset);
      const auto ci = cooc.find(r.dataset);
      attach_entity_data(r, ni == numex_by.end() ? kNoNumex : ni->second, ci == cooc.end() ? kNoCooc : ci->second);
      records.push_back(std::move(r));
    }

    std::ostringstream rs;
    write_records(rs, records);
    const fs::path rpath = run_dir_ / "records" / (m.name + ".csv");
    write_file(rpath, rs.str());
    const fs::path npath = run_dir_ / "numex" / (m.name + ".csv");
    write_file(npath, numex_table(numex).to_csv());
    outputs.push_back(rpath);
    outputs.push_back(npath);
  }
  finish_stage("parse", input_hash, outputs);
}

namespace {
struct Loaded {
  std::vector<AnalysisRecord> records;
  std::vector<NumexResult> numex;
};

Loaded load_parsed(const fs::path& run_dir, const RunConfig& cfg) {
  Loaded l;
  for (const auto& m : cfg.models) {
    std::ifstream in(run_dir / "records" / (m.name + ".csv"), std::ios::binary);
    auto recs = read_records(in, m.name + " records");
    l.records.insert(l.records.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    auto nx = read_numex_table(Table::load(run_dir / "numex" / (m.name + ".csv")));
    l.numex.insert(l.numex.end(), nx.begin(), nx.end());
  }
  return l;
}
}  // namespace

void Run::analyze() {
  require_stage("parse");
  nlohmann::json in{{"parse", output_hash("parse")},
                    {"seed", config_.seed},
                    {"n_resamples", config_.bootstrap.n_resamples},
                    {"unit", config_.bootstrap.unit == BootstrapUnit::block ? "block" : "record"}};
  const std::string input_hash = hash_string(in.dump());
  if (up_to_date("analyze", input_hash)) {
    ++stages_skipped_;
    return;
  }
  const Loaded l = load_parsed(run_dir_, config_);
  AnalysisOptions opts;
  opts.seed = config_.seed;
  opts.bootstrap = config_.bootstrap;
  const Reports reports = cueaudit::analyze(l.records, l.numex, opts);
  std::vector<fs::path> outputs;
  for (const auto& [name, table] : reports.all()) {
    const fs::path p = run_dir_ / "reports" / (name + ".csv");
    table->save(p);
    outputs.push_back(p);
  }
  finish_stage("analyze", input_hash, outputs);
}

void Run::probe_swap() {
  require_stage("parse");
  const std::string input_hash = hash_string(output_hash("parse") + "|" + std::to_string(config_.seed));
  if (up_to_date("probe-swap", input_hash)) {
    ++stages_skipped_;
    return;
  }
  const Loaded l = load_parsed(run_dir_, config_);
  ResponseCache cache(config_.cache_dir / "responses.jsonl");
  std::map<std::string, std::unique_ptr<Backend>> backends;
  std::map<std::string, std::unique_ptr<Gateway>> gateways;
  for (const auto& m : config_.models) {
    backends[m.name] = make_backend(m);
    gateways[m.name] = std::make_unique<Gateway>(*backends[m.name], &cache, config_.gateway);
  }
  const SwapReports rep = cueaudit::probe_swap(l.records, config_.seed, [&](const std::string& model) {
    return gateway_reasker(*gateways.at(model), res_->templates, config_.temperature, config_.thinking_marker,
                           res_->rules);
  });
  for (const auto& [name, g] : gateways) {
    const auto st = g->stats();
    backend_calls_ += st.requests - st.cache_hits;
  }
  const fs::path s = run_dir_ / "reports" / "swap.csv";
  const fs::path ss = run_dir_ / "reports" / "swap_summary.csv";
  rep.swap.save(s);
  rep.swap_summary.save(ss);
  finish_stage("probe-swap", input_hash, {s, ss});
}

void Run::run_all() {
  sample();
  render();
  query();
  parse();
  analyze();
}

fs::path Run::report_path(const std::string& table) const {
  static const std::set<std::string> analyzed = {"metrics", "numex", "sensitivity", "bos",
                                                 "meta",    "meta_summary", "cases", "effects"};
  std::string stage;
  if (analyzed.count(table)) {
    stage = "analyze";
  } else if (table == "swap" || table == "swap_summary") {
    stage = "probe-swap";
  } else {
    throw ConfigError("unknown table '" + table +
                      "'; expected one of metrics, numex, sensitivity, bos, meta, meta_summary, cases, effects, "
                      "swap, swap_summary");
  }
  require_stage(stage);
  return run_dir_ / "reports" / (table + ".csv");
}

}  // namespace cueaudit
