#include "cueaudit/cues.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cueaudit/log.hpp"
#include "cueaudit/text.hpp"

namespace cueaudit {

std::string EmbeddingStore::normalize_key(std::string_view key) {
  std::string_view k = key;
  if (k.rfind("/c/en/", 0) == 0) k.remove_prefix(6);
  std::string out;
  bool pending_sep = false;
  for (unsigned char c : trim(k)) {
    if (std::isspace(c)) {
      pending_sep = true;
      continue;
    }
    if (pending_sep) out += '_';
    pending_sep = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

EmbeddingStore EmbeddingStore::parse(std::istream& in, const std::string& source_name) {
  EmbeddingStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    {
      std::istringstream ls(line);
      std::string f;
      while (ls >> f) fields.push_back(f);
    }
    const auto where = source_name + ": line " + std::to_string(lineno);
    auto number = [&](const std::string& f) {
      double x = 0;
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
      if (ec != std::errc() || p != f.data() + f.size()) throw LoadError(where + ": bad number");
      return x;
    };
    if (lineno == 1 && fields.size() == 2 && store.size() == 0 &&
        fields[0].find_first_not_of("0123456789") == std::string::npos) {
      // "count dim" header
      store.dimension_ = static_cast<std::size_t>(number(fields[1]));
      continue;
    }
    // Once the dimension is known, words may contain spaces.
    std::size_t first_num = 1;
    if (store.dimension_ && fields.size() > store.dimension_) first_num = fields.size() - store.dimension_;
    std::string token;
    for (std::size_t k = 0; k < first_num; ++k) token += (k ? " " : "") + fields[k];
    std::vector<double> vec;
    for (std::size_t k = first_num; k < fields.size(); ++k) vec.push_back(number(fields[k]));
    if (vec.empty()) throw LoadError(where + ": no vector");
    try {
      store.add(token, std::move(vec));
    } catch (const ValidationError& e) {
      throw LoadError(source_name + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return store;
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open embeddings: " + path.string());
  return parse(in, path.string());
}

void EmbeddingStore::write(std::ostream& out) const {
  std::vector<const std::pair<const std::string, std::vector<double>>*> rows;
  for (const auto& kv : vectors_) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  out << rows.size() << ' ' << dimension_ << '\n';
  for (const auto* kv : rows) {
    out << kv->first;
    for (double x : kv->second) out << ' ' << format_number(x);
    out << '\n';
  }
}

void EmbeddingStore::add(std::string_view key, std::vector<double> vec) {
  if (dimension_ == 0) dimension_ = vec.size();
  if (vec.size() != dimension_)
    throw ValidationError("vector for '" + std::string(key) + "' has " + std::to_string(vec.size()) +
                          " components, expected " + std::to_string(dimension_));
  vectors_[normalize_key(key)] = std::move(vec);
}

const std::vector<double>* EmbeddingStore::find(std::string_view key) const {
  auto it = vectors_.find(normalize_key(key));
  return it == vectors_.end() ? nullptr : &it->second;
}

std::string embedding_key_for(const EntityRecord& e) {
  return EmbeddingStore::normalize_key(e.embedding_key && !e.embedding_key->empty() ? *e.embedding_key
                                                                                      : e.display_name);
}

bool MagnitudeAxis::degenerate() const {
  for (double x : axis)
    if (x != 0.0) return false;
  return true;
}

MagnitudeAxis magnitude_axis(const AttributeSpec& spec, const EmbeddingStore& store) {
  MagnitudeAxis out;
  auto mean_of = [&](const std::vector<std::string>& words, const char* side) {
    std::vector<double> sum(store.dimension(), 0.0);
    std::size_t found = 0;
    for (const auto& w : words) {
      const auto* v = store.find(w);
      if (!v) {
        out.missing_keywords.push_back(w);
        log::info(spec.dataset_name + ": keyword '" + w + "' not in embeddings");
        continue;
      }
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
      ++found;
    }
    if (found == 0)
      throw CueUnavailableError(spec.dataset_name + ": no " + side + " keyword found in embeddings");
    for (auto& x : sum) x /= static_cast<double>(found);
    return sum;
  };
  const auto pos = mean_of(spec.positive_keywords, "positive");
  const auto neg = mean_of(spec.negative_keywords, "negative");
  out.axis.resize(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) out.axis[i] = pos[i] - neg[i];
  return out;
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size() && i < v.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::optional<double> cooccurrence_score(const EntityRecord& entity, const std::vector<double>& axis,
                                         const EmbeddingStore& store) {
  const auto* e = store.find(embedding_key_for(entity));
  if (!e || e->size() != axis.size()) return std::nullopt;
  bool zero_axis = true;
  for (double x : axis) zero_axis &= x == 0.0;
  if (zero_axis) return std::nullopt;
  return cosine(*e, axis);
}

std::string_view to_string(Feature f) {
  switch (f) {
    case Feature::P: return "P";
    case Feature::O: return "O";
    case Feature::C: return "C";
    case Feature::I: return "I";
  }
  return "?";
}

Feature feature_from_string(std::string_view s) {
  for (auto f : kFeatures)
    if (to_string(f) == s) return f;
  throw ConfigError("unknown feature: " + std::string(s));
}

std::optional<bool> FeatureVector::get(Feature f) const {
  switch (f) {
    case Feature::P: return P;
    case Feature::O: return O;
    case Feature::C: return C;
    case Feature::I: return I;
  }
  return std::nullopt;
}

int FeatureVector::cell() const {
  return (*P ? 8 : 0) + (*O ? 4 : 0) + (*C ? 2 : 0) + (*I ? 1 : 0);
}

FeatureVector annotate(const AnalysisRecord& r) {
  const Side hi = r.pair.larger;
  const Side lo = hi == Side::a ? Side::b : Side::a;
  auto by_side = [](Side s, const auto& a, const auto& b) { return s == Side::a ? a : b; };

  FeatureVector f;
  const double q_hi = by_side(hi, r.qrank_a(), r.qrank_b());
  const double q_lo = by_side(lo, r.qrank_a(), r.qrank_b());
  if (q_hi != q_lo) f.P = q_hi > q_lo;
  f.O = slot_of_side(r.ordering, hi) == Slot::first;
  const auto c_hi = by_side(hi, r.cooc_a, r.cooc_b);
  const auto c_lo = by_side(lo, r.cooc_a, r.cooc_b);
  if (c_hi && c_lo && *c_hi != *c_lo) f.C = *c_hi > *c_lo;
  const auto n_hi = by_side(hi, r.numex_a, r.numex_b);
  const auto n_lo = by_side(lo, r.numex_a, r.numex_b);
  if (n_hi && n_lo && *n_hi != *n_lo) f.I = *n_hi > *n_lo;
  return f;
}

FeatureVector annotate(const AnalysisRecord& record, const std::vector<double>& axis, const EmbeddingStore& store) {
  AnalysisRecord r = record;
  r.cooc_a = cooccurrence_score(r.pair.entity_a, axis, store);
  r.cooc_b = cooccurrence_score(r.pair.entity_b, axis, store);
  return annotate(r);
}

}  // namespace cueaudit
