#include "cueaudit/bos.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include "cueaudit/rng.hpp"

namespace cueaudit {

std::size_t BosTable::retained() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.retained.size();
  return n;
}

std::size_t BosTable::total() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.total;
  return n;
}

std::vector<AnnotatedRecord> BosTable::records() const {
  std::vector<AnnotatedRecord> out;
  for (const auto& g : groups) out.insert(out.end(), g.retained.begin(), g.retained.end());
  return out;
}

BosTable build_bos(std::span<const AnnotatedRecord> records, std::uint64_t seed) {
  std::map<std::pair<std::string, std::string>, std::vector<const AnnotatedRecord*>> by_group;
  for (const auto& r : records) by_group[{r.record.dataset, r.record.template_id}].push_back(&r);

  BosTable table;
  for (const auto& [key, members] : by_group) {
    BosGroup g;
    g.dataset = key.first;
    g.template_id = key.second;
    g.total = members.size();
    std::array<std::vector<const AnnotatedRecord*>, 16> cells;
    for (const auto* r : members) {
      if (!r->features.complete()) {
        ++g.undefined_features;
        continue;
      }
      cells[r->features.cell()].push_back(r);
    }
    for (int c = 0; c < 16; ++c) g.cell_counts[c] = cells[c].size();
    g.minority_count = *std::min_element(g.cell_counts.begin(), g.cell_counts.end());
    g.available = g.minority_count > 0;
    if (g.available) {
      Rng rng(derive_seed(seed, "bos/" + g.dataset + "/" + g.template_id));
      for (auto& cell : cells) {
        // Partial Fisher-Yates: the first minority_count slots are the sample.
        for (std::size_t i = 0; i < g.minority_count; ++i) {
          const std::size_t j = i + rng.index(cell.size() - i);
          std::swap(cell[i], cell[j]);
          g.retained.push_back(*cell[i]);
        }
      }
    }
    table.groups.push_back(std::move(g));
  }
  return table;
}

namespace {

// Position is counted as "the entity the question asks for is named first",
// so a negative-polarity prompt uses the complement of O.
BlockCounts counts_of(std::span<const AnnotatedRecord* const> records, Feature feature) {
  BlockCounts b;
  for (const auto* r : records) {
    auto f = r->features.get(feature);
    if (!f) continue;
    if (feature == Feature::O && r->record.polarity == Polarity::negative) f = !*f;
    const double hit = r->correct() ? 1.0 : 0.0;
    if (*f) {
      b.n1 += 1;
      b.c1 += hit;
    } else {
      b.n0 += 1;
      b.c0 += hit;
    }
  }
  return b;
}

std::optional<double> rr_of(const BlockCounts& b) {
  if (b.n1 == 0 || b.n0 == 0 || b.c0 == 0) return std::nullopt;
  return (b.c1 / b.n1) / (b.c0 / b.n0);
}

std::vector<std::vector<const AnnotatedRecord*>> blocks_of(std::span<const AnnotatedRecord> records) {
  std::map<std::pair<std::string, std::string>, std::vector<const AnnotatedRecord*>> by_block;
  for (const auto& r : records) by_block[{r.record.dataset, r.record.template_id}].push_back(&r);
  std::vector<std::vector<const AnnotatedRecord*>> out;
  for (auto& kv : by_block) out.push_back(std::move(kv.second));
  return out;
}

}  // namespace

std::optional<double> risk_ratio(std::span<const AnnotatedRecord> records, Feature feature) {
  std::vector<const AnnotatedRecord*> ptrs;
  for (const auto& r : records) ptrs.push_back(&r);
  return rr_of(counts_of(ptrs, feature));
}

std::optional<double> fold_direction(double rr) {
  if (!(rr > 0.0)) return std::nullopt;
  return std::max(rr, 1.0 / rr);
}

double e_value(double rr) {
  if (!(rr >= 1.0)) throw std::invalid_argument("e_value needs rr >= 1");
  return rr + std::sqrt(rr * (rr - 1.0));
}

std::optional<double> combine_blocks(std::span<const BlockCounts> blocks, Feature feature) {
  BlockCounts pooled;
  for (const auto& b : blocks) {
    pooled.n1 += b.n1;
    pooled.c1 += b.c1;
    pooled.n0 += b.n0;
    pooled.c0 += b.c0;
  }
  const auto rr = rr_of(pooled);
  if (feature == Feature::O && rr) return fold_direction(*rr);
  return rr;
}

std::optional<double> estimate_rr(std::span<const AnnotatedRecord> records, Feature feature) {
  std::vector<BlockCounts> counts;
  for (const auto& block : blocks_of(records)) counts.push_back(counts_of(block, feature));
  return combine_blocks(counts, feature);
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::optional<RiskRatioEstimate> bootstrap_ci(std::span<const AnnotatedRecord> records, Feature feature,
                                              const BootstrapOptions& options) {
  if (options.n_resamples == 0) throw std::invalid_argument("bootstrap needs at least one resample");
  const auto blocks = blocks_of(records);
  if (options.unit == BootstrapUnit::block && blocks.size() < 2)
    throw std::invalid_argument("block bootstrap needs at least two (dataset, template) blocks");

  std::vector<BlockCounts> block_counts;
  for (const auto& b : blocks) block_counts.push_back(counts_of(b, feature));
  const auto point = combine_blocks(block_counts, feature);
  if (!point) return std::nullopt;

  // Flattened (block index, record) view for record-level resampling.
  std::vector<std::pair<std::size_t, const AnnotatedRecord*>> flat;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (const auto* r : blocks[b]) flat.emplace_back(b, r);

  std::vector<std::optional<double>> draws(options.n_resamples);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(i)));
      std::vector<BlockCounts> sample;
      if (options.unit == BootstrapUnit::block) {
        sample.reserve(blocks.size());
        for (std::size_t k = 0; k < blocks.size(); ++k) sample.push_back(block_counts[rng.index(blocks.size())]);
      } else {
        std::vector<std::vector<const AnnotatedRecord*>> rs(blocks.size());
        for (std::size_t k = 0; k < flat.size(); ++k) {
          const auto& [b, r] = flat[rng.index(flat.size())];
          rs[b].push_back(r);
        }
        for (const auto& b : rs) sample.push_back(counts_of(b, feature));
      }
      draws[i] = combine_blocks(sample, feature);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, options.n_resamples);
  if (threads == 1) {
    run(0, options.n_resamples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (options.n_resamples + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(options.n_resamples, begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<double> valid;
  for (const auto& d : draws)
    if (d) valid.push_back(*d);
  std::sort(valid.begin(), valid.end());

  RiskRatioEstimate est;
  est.feature = feature;
  est.rr = *point;
  est.n_bootstrap = options.n_resamples;
  est.dropped = options.n_resamples - valid.size();
  est.blocks = blocks.size();
  est.ci_low = valid.empty() ? *point : std::min(*point, percentile(valid, 0.025));
  est.ci_high = valid.empty() ? *point : std::max(*point, percentile(valid, 0.975));
  return est;
}

}  // namespace cueaudit
