#pragma once

// In-process mock runs: sample, render, answer with a mock, parse, join.

#include <map>
#include <string>
#include <vector>

#include "cueaudit/defaults.hpp"
#include "cueaudit/rng.hpp"
#include "cueaudit/mock.hpp"
#include "cueaudit/pipeline.hpp"
#include "cueaudit/synth.hpp"

namespace testing {

struct SimResult {
  std::vector<cueaudit::AnalysisRecord> records;
  std::vector<cueaudit::NumexResult> numex;
};

inline SimResult simulate(const cueaudit::SynthWorld& world, const cueaudit::MockProfile& profile, std::uint64_t seed,
                          cueaudit::Mode mode = cueaudit::Mode::plain) {
  using namespace cueaudit;
  SimResult out;
  const auto& reg = builtin_templates();
  for (const auto& [ds, catalog] : world.catalogs) {
    std::map<std::string, NumexResult> numex_by;
    for (const auto& e : catalog.entities()) {
      const auto jobs = render_numeric(ds, e, reg);
      std::vector<Completion> comps;
      for (const auto& j : jobs) comps.push_back(mock_complete(j, profile));
      auto r = select_numex(profile.name, catalog.spec(), e, jobs, comps);
      numex_by[e.entity_id] = r;
      out.numex.push_back(std::move(r));
    }
    const auto cooc = cooccurrence_scores(catalog, world.embeddings);
    for (const auto& pair : stratified_sample_pairs(catalog, derive_seed(seed, "sample/" + ds))) {
      for (const auto& job : render_pairwise(ds, pair, reg, mode)) {
        const auto c = mock_complete(job, profile);
        auto rec = make_record(profile.name, job, parse_completion(job, c));
        attach_entity_data(rec, numex_by, cooc);
        out.records.push_back(std::move(rec));
      }
    }
  }
  return out;
}

inline cueaudit::SynthWorld small_world(std::size_t entities = 30, std::uint64_t seed = 1,
                                        std::vector<std::string> datasets = {"rivers", "mountains", "cities"}) {
  cueaudit::SynthOptions o;
  o.entities = entities;
  o.seed = seed;
  o.datasets = std::move(datasets);
  return cueaudit::generate_world(o);
}

}  // namespace testing
