#include "cueaudit/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cueaudit/log.hpp"
#include "cueaudit/rng.hpp"
#include "cueaudit/text.hpp"

namespace cueaudit {

namespace {

std::string fmt(std::optional<double> v) { return v ? format_number(*v) : std::string(); }
std::string fmt(double v) { return format_number(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt_bool(bool b) { return b ? "1" : "0"; }

std::optional<double> parse_opt(const std::string& s, const std::string& where) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw LoadError(where + ": bad number '" + s + "'");
  return v;
}

double parse_req(const std::string& s, const std::string& where) {
  const auto v = parse_opt(s, where);
  if (!v) throw LoadError(where + ": missing number");
  return *v;
}

template <class T, class Key>
std::vector<Key> sorted_keys(const std::vector<T>& items, Key (*key)(const T&)) {
  std::set<Key> keys;
  for (const auto& it : items) keys.insert(key(it));
  return {keys.begin(), keys.end()};
}

std::string model_of(const AnalysisRecord& r) { return r.model; }
std::string dataset_of(const AnalysisRecord& r) { return r.dataset; }

std::vector<AnalysisRecord> where(std::span<const AnalysisRecord> records,
                                  const std::function<bool(const AnalysisRecord&)>& pred) {
  std::vector<AnalysisRecord> out;
  for (const auto& r : records)
    if (pred(r)) out.push_back(r);
  return out;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::pair<std::optional<double>, std::optional<double>> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {std::nullopt, std::nullopt};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, std::nullopt};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

// ---- Table ---------------------------------------------------------------------

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw std::logic_error("row has " + std::to_string(row.size()) + " fields, header has " +
                           std::to_string(header.size()));
  rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(fields[i]);
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string Table::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

void Table::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  write_csv(out);
}

Table Table::parse_csv(std::istream& in, const std::string& source_name) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = parse_csv_line(line);
    } catch (const std::exception& e) {
      throw LoadError(source_name + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw LoadError(source_name + ": line " + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  return t;
}

Table Table::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw LoadError("missing column '" + name + "'");
}

// ---- numeric extraction -----------------------------------------------------

NumexResult select_numex(const std::string& model, const AttributeSpec& spec, const EntityRecord& entity,
                         std::span<const NumericJob> jobs, std::span<const Completion> completions,
                         const UnitTable& units) {
  if (jobs.size() != completions.size()) throw std::invalid_argument("jobs and completions differ in length");
  NumexResult res;
  res.model = model;
  res.dataset = spec.dataset_name;
  res.entity_id = entity.entity_id;
  res.gt = entity.gt_value;

  std::vector<NumericParse> parses(jobs.size());
  std::vector<std::size_t> parsed;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (completions[k].finish_reason == FinishReason::error) continue;
    parses[k] = parse_numeric(strip_reasoning(completions[k].text), spec, entity.gt_value, units,
                              {entity.display_name});
    if (parses[k].value) parsed.push_back(k);
  }

  if (!parsed.empty()) {
    bool all_scored = true;
    for (std::size_t k : parsed) all_scored &= perplexity(completions[k]).has_value();
    std::size_t best = parsed.front();
    if (all_scored) {
      for (std::size_t k : parsed)
        if (*perplexity(completions[k]) < *perplexity(completions[best])) best = k;
    } else {
      res.degraded = true;
    }
    res.value = parses[best].value;
    res.template_id = jobs[best].template_id;
    res.perplexity = perplexity(completions[best]);
    res.candidates = parses[best].candidates_seen;
    res.gt_changed_outcome = parses[best].gt_changed_outcome;
  }

  if (jobs.size() >= 2) {
    std::vector<double> values;
    for (const auto& p : parses) values.push_back(p.value.value_or(0.0));
    res.cv = cv(values);
  }
  return res;
}

Table numex_table(std::span<const NumexResult> results) {
  Table t;
  t.header = {"model", "dataset", "entity_id", "gt", "numex", "template_id", "perplexity",
              "cv", "smape", "candidates", "gt_changed_outcome", "degraded"};
  for (const auto& r : results) {
    const auto s = r.value ? smape(r.gt, *r.value) : std::nullopt;
    t.add({r.model, r.dataset, r.entity_id, fmt(r.gt), fmt(r.value), r.template_id, fmt(r.perplexity), fmt(r.cv),
           fmt(s), std::to_string(r.candidates), fmt_bool(r.gt_changed_outcome), fmt_bool(r.degraded)});
  }
  return t;
}

std::vector<NumexResult> read_numex_table(const Table& t) {
  std::vector<NumexResult> out;
  const auto c = [&](const char* name) { return t.column(name); };
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = "numex row " + std::to_string(i + 1);
    NumexResult r;
    r.model = row[c("model")];
    r.dataset = row[c("dataset")];
    r.entity_id = row[c("entity_id")];
    r.gt = parse_req(row[c("gt")], where);
    r.value = parse_opt(row[c("numex")], where);
    r.template_id = row[c("template_id")];
    r.perplexity = parse_opt(row[c("perplexity")], where);
    r.cv = parse_opt(row[c("cv")], where);
    r.candidates = static_cast<int>(parse_req(row[c("candidates")], where));
    r.gt_changed_outcome = row[c("gt_changed_outcome")] == "1";
    r.degraded = row[c("degraded")] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

// ---- pairwise records -------------------------------------------------------

PairwiseParse parse_completion(const ComparisonJob& job, const Completion& c, const DirectionalRules& rules) {
  if (c.finish_reason == FinishReason::error) return {};
  if (job.mode == Mode::thinking && c.finish_reason == FinishReason::length) return {};
  return parse_pairwise(strip_reasoning(c.text), job.pair.entity_a.display_name, job.pair.entity_b.display_name,
                        job.ordering, job.polarity, rules);
}

AnalysisRecord make_record(const std::string& model, const ComparisonJob& job, const PairwiseParse& parse) {
  AnalysisRecord r;
  r.model = model;
  r.dataset = job.dataset;
  r.pair = job.pair;
  r.template_id = job.template_id;
  r.polarity = job.polarity;
  r.ordering = job.ordering;
  r.mode = job.mode;
  r.model_choice = parse.choice;
  r.resolution_step = parse.resolution_step;
  return r;
}

std::map<std::string, double> cooccurrence_scores(const EntityCatalog& catalog, const EmbeddingStore& store) {
  std::map<std::string, double> out;
  MagnitudeAxis axis;
  try {
    axis = magnitude_axis(catalog.spec(), store);
  } catch (const CueUnavailableError& e) {
    log::warn(e.what());
    return out;
  }
  if (axis.degenerate()) {
    log::warn(catalog.spec().dataset_name + ": magnitude axis is zero; co-occurrence cue undefined");
    return out;
  }
  std::size_t missing = 0;
  for (const auto& e : catalog.entities()) {
    if (const auto s = cooccurrence_score(e, axis.axis, store)) {
      out[e.entity_id] = *s;
    } else {
      ++missing;
    }
  }
  if (missing)
    log::info(catalog.spec().dataset_name + ": " + std::to_string(missing) + " entities without embeddings");
  return out;
}

void attach_entity_data(AnalysisRecord& r, const std::map<std::string, NumexResult>& numex_by_entity,
                        const std::map<std::string, double>& cooc_by_entity) {
  auto fill = [&](const EntityRecord& e, std::optional<double>& numex, std::optional<double>& cv_out,
                  std::optional<double>& cooc) {
    if (auto it = numex_by_entity.find(e.entity_id); it != numex_by_entity.end()) {
      numex = it->second.value;
      cv_out = it->second.cv;
    }
    if (auto it = cooc_by_entity.find(e.entity_id); it != cooc_by_entity.end()) cooc = it->second;
  };
  fill(r.pair.entity_a, r.numex_a, r.cv_a, r.cooc_a);
  fill(r.pair.entity_b, r.numex_b, r.cv_b, r.cooc_b);
}

namespace {
const std::vector<std::string> kRecordHeader = {
    "model",  "dataset", "template_id", "polarity", "ordering", "mode",    "entity_a", "name_a",
    "gt_a",   "qrank_a", "entity_b",    "name_b",   "gt_b",     "qrank_b", "larger",   "choice",
    "resolution_step", "numex_a", "numex_b", "cooc_a", "cooc_b", "cv_a", "cv_b"};
}

void write_records(std::ostream& out, std::span<const AnalysisRecord> records) {
  Table t;
  t.header = kRecordHeader;
  for (const auto& r : records) {
    const auto& a = r.pair.entity_a;
    const auto& b = r.pair.entity_b;
    t.add({r.model, r.dataset, r.template_id, std::string(to_string(r.polarity)), std::string(to_string(r.ordering)),
           std::string(to_string(r.mode)), a.entity_id, a.display_name, fmt(a.gt_value), std::to_string(a.qrank),
           b.entity_id, b.display_name, fmt(b.gt_value), std::to_string(b.qrank),
           r.pair.larger == Side::a ? "a" : "b", std::string(to_string(r.model_choice)),
           std::string(to_string(r.resolution_step)), fmt(r.numex_a), fmt(r.numex_b), fmt(r.cooc_a), fmt(r.cooc_b),
           fmt(r.cv_a), fmt(r.cv_b)});
  }
  t.write_csv(out);
}

std::vector<AnalysisRecord> read_records(std::istream& in, const std::string& source_name) {
  const Table t = Table::parse_csv(in, source_name);
  if (t.header != kRecordHeader) throw LoadError(source_name + ": unexpected record header");
  std::vector<AnalysisRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& f = t.rows[i];
    const std::string where = source_name + ": row " + std::to_string(i + 1);
    AnalysisRecord r;
    try {
      r.model = f[0];
      r.dataset = f[1];
      r.template_id = f[2];
      r.polarity = polarity_from_string(f[3]);
      r.ordering = ordering_from_string(f[4]);
      r.mode = mode_from_string(f[5]);
      r.pair.entity_a = {f[6], f[7], parse_req(f[8], where), static_cast<std::uint64_t>(std::stoull(f[9])), {}};
      r.pair.entity_b = {f[10], f[11], parse_req(f[12], where), static_cast<std::uint64_t>(std::stoull(f[13])), {}};
      if (f[14] != "a" && f[14] != "b") throw LoadError(where + ": larger must be a or b");
      r.pair.larger = f[14] == "a" ? Side::a : Side::b;
      r.model_choice = choice_from_string(f[15]);
      r.resolution_step = resolution_step_from_string(f[16]);
    } catch (const LoadError&) {
      throw;
    } catch (const std::exception& e) {
      throw LoadError(where + ": " + e.what());
    }
    r.numex_a = parse_opt(f[17], where);
    r.numex_b = parse_opt(f[18], where);
    r.cooc_a = parse_opt(f[19], where);
    r.cooc_b = parse_opt(f[20], where);
    r.cv_a = parse_opt(f[21], where);
    r.cv_b = parse_opt(f[22], where);
    out.push_back(std::move(r));
  }
  return out;
}

// ---- analysis ----------------------------------------------------------------

std::map<std::string, const Table*> Reports::all() const {
  return {{"metrics", &metrics}, {"numex", &numex},           {"sensitivity", &sensitivity}, {"bos", &bos},
          {"meta", &meta},       {"meta_summary", &meta_summary}, {"cases", &cases},         {"effects", &effects}};
}

std::vector<StratumFit> fit_strata(std::span<const AnalysisRecord> filtered, const std::string& model,
                                   std::uint64_t seed) {
  std::map<std::pair<std::string, std::string>, std::vector<AnalysisRecord>> groups;
  for (const auto& r : filtered) groups[{r.dataset, r.template_id}].push_back(r);
  std::vector<StratumFit> out;
  for (auto& [key, recs] : groups) {
    StratumFit s;
    s.dataset = key.first;
    s.template_id = key.second;
    s.records = std::move(recs);
    std::size_t usable = 0;
    for (const auto& r : s.records) usable += meta_features(r).has_value() && r.model_choice != Choice::unknown;
    if (usable < kMinMetaStratum) {
      s.status = "too_few_records";
    } else {
      s.fit = fit_meta_predictor(s.records, derive_seed(seed, "folds/" + model + "/" + s.dataset + "/" + s.template_id));
      s.improvement = improvement_over_numbers(s.records, *s.fit);
      s.status = "ok";
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

void metrics_rows(Table& t, const std::string& model, const std::string& dataset,
                  const std::vector<AnalysisRecord>& ds) {
  auto emit = [&](const std::string& tmpl, const std::string& pol, std::span<const AnalysisRecord> sub) {
    const std::pair<const char*, Metric> ms[] = {{"pairwise_accuracy", pairwise_accuracy(sub)},
                                                 {"internal_consistency", internal_consistency(sub)},
                                                 {"numerical_accuracy", numerical_accuracy(sub)}};
    for (const auto& [name, m] : ms) t.add({model, dataset, tmpl, pol, name, fmt(m.value), fmt(m.n)});
  };
  std::map<std::string, std::vector<AnalysisRecord>> by_template;
  for (const auto& r : ds) by_template[r.template_id].push_back(r);
  for (const auto& [tmpl, sub] : by_template) emit(tmpl, std::string(to_string(sub.front().polarity)), sub);
  emit("all", "all", ds);
}

void sensitivity_rows(Table& t, const std::string& model, const std::string& dataset,
                      const std::vector<AnalysisRecord>& all_ds, const std::vector<AnalysisRecord>& ds,
                      std::span<const NumexResult> numex) {
  FilterReport fr;
  filter_valid(all_ds, &fr);
  auto add = [&](const char* measure, std::optional<double> v, std::size_t n) {
    t.add({model, dataset, measure, fmt(v), fmt(n)});
  };
  add("kept_fraction", ratio(fr.kept, fr.total), fr.total);
  add("unknown_choice_rate", ratio(fr.unknown_choice, fr.total), fr.total);
  add("missing_numex_rate", ratio(fr.missing_numex, fr.total), fr.total);
  add("polarity_gap", polarity_gap(ds), ds.size());
  const auto tmr = template_majority(all_ds);
  add("tmr_full_agreement", ratio(tmr.full_agreement, tmr.groups()), tmr.groups());
  add("tmr_two_vs_one", ratio(tmr.two_vs_one, tmr.groups()), tmr.groups());
  add("tmr_full_disagreement", ratio(tmr.full_disagreement, tmr.groups()), tmr.groups());
  add("tmr_groups_with_unknown", ratio(tmr.groups_with_unknown, tmr.groups()), tmr.groups());
  std::vector<double> cvs, smapes;
  for (const auto& n : numex) {
    if (n.model != model || n.dataset != dataset) continue;
    if (n.cv) cvs.push_back(*n.cv);
    if (n.value)
      if (const auto s = smape(n.gt, *n.value)) smapes.push_back(*s);
  }
  add("cv_mean", mean_sd(cvs).first, cvs.size());
  add("smape_mean", mean_sd(smapes).first, smapes.size());
}

void bos_rows(Table& t, const std::string& model, const std::vector<std::string>& datasets,
              const std::vector<AnalysisRecord>& filtered, const AnalysisOptions& options) {
  std::vector<AnnotatedRecord> annotated;
  annotated.reserve(filtered.size());
  for (const auto& r : filtered) annotated.push_back({r, annotate(r)});
  const BosTable bos = build_bos(annotated, derive_seed(options.seed, "bos/" + model));

  auto emit = [&](const std::string& dataset, const std::vector<const BosGroup*>& groups) {
    std::vector<AnnotatedRecord> recs;
    std::size_t retained = 0, total = 0;
    for (const auto* g : groups) {
      recs.insert(recs.end(), g->retained.begin(), g->retained.end());
      retained += g->retained.size();
      total += g->total;
    }
    for (auto f : kFeatures) {
      BootstrapOptions bo = options.bootstrap;
      bo.seed = derive_seed(options.seed, "bootstrap/" + model + "/" + dataset + "/" + std::string(to_string(f)));
      std::optional<RiskRatioEstimate> est;
      try {
        est = bootstrap_ci(recs, f, bo);
      } catch (const std::invalid_argument& e) {
        log::info(model + "/" + dataset + " RR_" + std::string(to_string(f)) + ": " + e.what());
      }
      std::optional<double> ev;
      if (est)
        if (const auto folded = fold_direction(est->rr)) ev = e_value(*folded);
      t.add({model, dataset, std::string(to_string(f)), est ? fmt(est->rr) : "", est ? fmt(est->ci_low) : "",
             est ? fmt(est->ci_high) : "", fmt(ev), fmt(retained), fmt(total)});
    }
  };
  std::vector<const BosGroup*> everything;
  for (const auto& ds : datasets) {
    std::vector<const BosGroup*> groups;
    for (const auto& g : bos.groups)
      if (g.dataset == ds) groups.push_back(&g);
    everything.insert(everything.end(), groups.begin(), groups.end());
    emit(ds, groups);
  }
  if (datasets.size() > 1) emit("all", everything);
}

}  // namespace

Reports analyze(std::span<const AnalysisRecord> records, std::span<const NumexResult> numex,
                const AnalysisOptions& options) {
  Reports rep;
  rep.metrics.header = {"model", "dataset", "template", "polarity", "metric", "value", "n"};
  rep.numex = numex_table(numex);
  rep.sensitivity.header = {"model", "dataset", "measure", "value", "n"};
  rep.bos.header = {"model", "dataset", "feature", "rr", "ci_low", "ci_high", "e_value", "retained", "total"};
  rep.meta.header = {"model",          "dataset",        "template",    "status",   "n",        "excluded",
                     "cv_accuracy",    "meta_accuracy",  "numex_accuracy", "improvement", "constant", "converged"};
  rep.meta_summary.header = {"model",           "dataset",          "templates",
                             "cv_accuracy_mean", "cv_accuracy_sd",   "improvement_mean",
                             "improvement_sd"};
  rep.cases.header = {"model", "dataset", "case", "correct", "count"};
  rep.effects.header = {"model", "dataset", "feature", "d", "n_case1", "n_case3", "missing"};

  const std::vector<AnalysisRecord> all(records.begin(), records.end());
  for (const auto& model : sorted_keys(all, &model_of)) {
    const auto model_all = where(records, [&](const AnalysisRecord& r) { return r.model == model; });
    const auto filtered = filter_valid(model_all);
    const auto datasets = sorted_keys(model_all, &dataset_of);

    for (const auto& ds : datasets) {
      const auto ds_all = where(model_all, [&](const AnalysisRecord& r) { return r.dataset == ds; });
      const auto ds_f = where(filtered, [&](const AnalysisRecord& r) { return r.dataset == ds; });
      metrics_rows(rep.metrics, model, ds, ds_f);
      sensitivity_rows(rep.sensitivity, model, ds, ds_all, ds_f, numex);
    }

    bos_rows(rep.bos, model, datasets, filtered, options);

    const auto strata = fit_strata(filtered, model, options.seed);
    std::map<std::string, std::vector<double>> cv_acc, improvements;
    // case counts per dataset: [case-1][correct]
    std::map<std::string, std::array<std::array<std::size_t, 2>, 4>> case_counts;
    std::map<std::string, std::size_t> case_total;
    std::map<std::string, std::array<std::vector<double>, 10>> f_case1, f_case3;
    for (const auto& s : strata) {
      if (s.fit) {
        const auto& f = *s.fit;
        rep.meta.add({model, s.dataset, s.template_id, s.status, fmt(f.used.size()), fmt(f.excluded),
                      fmt(f.cv_accuracy), s.improvement ? fmt(s.improvement->meta_accuracy) : "",
                      s.improvement ? fmt(s.improvement->numex_accuracy) : "",
                      s.improvement ? fmt(s.improvement->improvement) : "", fmt_bool(f.any_constant),
                      fmt_bool(f.all_converged)});
        cv_acc[s.dataset].push_back(f.cv_accuracy);
        if (s.improvement) improvements[s.dataset].push_back(s.improvement->improvement);
      } else {
        rep.meta.add({model, s.dataset, s.template_id, s.status, fmt(s.records.size()), "", "", "", "", "", "", ""});
      }
      auto& counts = case_counts[s.dataset];
      case_total[s.dataset] += s.records.size();
      for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto pred = s.fit ? s.fit->prediction_for(i) : std::nullopt;
        const auto label = pred ? classify_case(s.records[i], *pred) : std::nullopt;
        if (!label) continue;
        ++counts[static_cast<std::size_t>(label->case_id - 1)][label->correct_vs_gt ? 1 : 0];
        if (label->case_id == 1 || label->case_id == 3) {
          const auto feats = case_contrast_features(s.records[i]);
          auto& dest = label->case_id == 1 ? f_case1[s.dataset] : f_case3[s.dataset];
          for (std::size_t k = 0; k < feats.size(); ++k)
            if (feats[k]) dest[k].push_back(*feats[k]);
        }
      }
    }
    for (const auto& ds : datasets) {
      const auto [cm, csd] = mean_sd(cv_acc[ds]);
      const auto [im, isd] = mean_sd(improvements[ds]);
      rep.meta_summary.add({model, ds, fmt(cv_acc[ds].size()), fmt(cm), fmt(csd), fmt(im), fmt(isd)});

      const auto& counts = case_counts[ds];
      std::size_t classified = 0;
      for (int c = 0; c < 4; ++c) {
        for (int correct : {1, 0}) {
          const std::size_t n = counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(correct)];
          classified += n;
          rep.cases.add({model, ds, std::to_string(c + 1), std::to_string(correct), fmt(n)});
        }
      }
      rep.cases.add({model, ds, "excluded", "", fmt(case_total[ds] - classified)});

      for (std::size_t k = 0; k < kContrastFeatures.size(); ++k) {
        const auto& g1 = f_case1[ds][k];
        const auto& g3 = f_case3[ds][k];
        const auto d = cohens_d(g1, g3);
        rep.effects.add({model, ds, std::string(kContrastFeatures[k]), fmt(d), fmt(g1.size()), fmt(g3.size()),
                         fmt_bool(!d)});
      }
    }
  }
  return rep;
}

SwapReports probe_swap(std::span<const AnalysisRecord> records, std::uint64_t seed,
                       const std::function<Reasker(const std::string& model)>& reask_for) {
  SwapReports out;
  out.swap.header = {"model", "dataset", "case", "label", "count", "share"};
  out.swap_summary.header = {"model", "dataset", "probes", "excluded", "entity_changed"};
  const std::vector<AnalysisRecord> all(records.begin(), records.end());
  for (const auto& model : sorted_keys(all, &model_of)) {
    const auto filtered = filter_valid(where(records, [&](const AnalysisRecord& r) { return r.model == model; }));
    const auto strata = fit_strata(filtered, model, seed);
    std::map<std::string, std::vector<SwapInput>> inputs;
    for (const auto& s : strata) {
      inputs[s.dataset];
      if (!s.fit) continue;
      for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto pred = s.fit->prediction_for(i);
        const auto label = pred ? classify_case(s.records[i], *pred) : std::nullopt;
        if (label && label->case_id == 2) inputs[s.dataset].push_back({s.records[i], s.fit->model_for(i)});
      }
    }
    const Reasker reask = reask_for(model);
    for (const auto& [ds, in] : inputs) {
      const SwapOutcome o = swap_probe(in, reask);
      const std::size_t classified = o.probes - o.excluded;
      for (int c = 1; c <= 4; ++c) {
        const std::size_t n = o.landed[static_cast<std::size_t>(c - 1)];
        out.swap.add({model, ds, std::to_string(c), std::string(migration_label(c)), fmt(n), fmt(ratio(n, classified))});
      }
      out.swap_summary.add({model, ds, fmt(o.probes), fmt(o.excluded), fmt(o.entity_changed)});
    }
  }
  return out;
}

Reasker gateway_reasker(Gateway& gateway, const TemplateRegistry& registry, double temperature,
                        std::string thinking_marker, const DirectionalRules& rules) {
  return [&gateway, &registry, temperature, marker = std::move(thinking_marker),
          rules](const AnalysisRecord& flipped) -> std::optional<AnalysisRecord> {
    const PromptTemplate* tmpl = registry.find(flipped.template_id);
    if (!tmpl) return std::nullopt;
    const ComparisonJob job = render_one(flipped.dataset, flipped.pair, *tmpl, flipped.ordering, flipped.mode, marker);
    const Completion c = gateway.complete(job, decoding_for(job, temperature));
    if (c.finish_reason == FinishReason::error) return std::nullopt;
    const PairwiseParse p = parse_completion(job, c, rules);
    AnalysisRecord out = flipped;
    out.model_choice = p.choice;
    out.resolution_step = p.resolution_step;
    return out;
  };
}

}  // namespace cueaudit
