#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "cueaudit/catalog.hpp"
#include "cueaudit/defaults.hpp"
#include "cueaudit/metrics.hpp"
#include "cueaudit/rng.hpp"

namespace testing {

inline const std::filesystem::path kFixtures = CUEAUDIT_FIXTURE_DIR;

inline cueaudit::EntityRecord entity(const std::string& id, double gt, std::uint64_t qrank = 100,
                                     const std::string& name = {}) {
  cueaudit::EntityRecord e;
  e.entity_id = id;
  e.display_name = name.empty() ? id : name;
  e.gt_value = gt;
  e.qrank = qrank;
  return e;
}

inline const cueaudit::AttributeSpec& spec(const std::string& dataset) {
  return cueaudit::builtin_attribute_specs().at(dataset);
}

// A record on pair (a, b) where `first` fills the first slot when ordering is ab.
inline cueaudit::AnalysisRecord record(double gt_a, double gt_b, cueaudit::Choice choice,
                                       cueaudit::Ordering ordering = cueaudit::Ordering::ab,
                                       cueaudit::Polarity polarity = cueaudit::Polarity::positive) {
  cueaudit::AnalysisRecord r;
  r.model = "m";
  r.dataset = "rivers";
  r.pair = cueaudit::make_pair(entity("a", gt_a), entity("b", gt_b));
  r.template_id = "rivers.pos1";
  r.polarity = polarity;
  r.ordering = ordering;
  r.model_choice = choice;
  r.resolution_step = choice == cueaudit::Choice::unknown ? cueaudit::ResolutionStep::none
                                                          : cueaudit::ResolutionStep::verbatim;
  return r;
}

// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("cueaudit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testing
