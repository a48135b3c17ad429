#pragma once

// Parser fixture corpus shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cueaudit/defaults.hpp"
#include "cueaudit/parsing.hpp"

namespace testing {

struct FixtureResult {
  std::string file;
  int line = 0;
  std::string kind;  // pairwise or numeric
  std::string expected_step;  // resolution step or selection rule
  bool passed = false;
  std::string detail;
};

inline std::vector<FixtureResult> run_parser_corpus(const std::filesystem::path& dir) {
  using namespace cueaudit;
  std::vector<FixtureResult> out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  for (const auto& path : files) {
    std::ifstream in(path);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      FixtureResult r;
      r.file = path.filename().string();
      r.line = no;
      const auto text = j.at("text").get<std::string>();
      if (j.contains("choice")) {
        r.kind = "pairwise";
        const auto p = parse_pairwise(text, j.at("a").get<std::string>(), j.at("b").get<std::string>(),
                                      ordering_from_string(j.at("ordering").get<std::string>()),
                                      polarity_from_string(j.at("polarity").get<std::string>()));
        r.expected_step = j.at("step").get<std::string>();
        r.passed = to_string(p.choice) == j.at("choice").get<std::string>() && to_string(p.resolution_step) == r.expected_step;
        r.detail = std::string(to_string(p.choice)) + "/" + std::string(to_string(p.resolution_step));
      } else {
        r.kind = "numeric";
        const auto& spec = builtin_attribute_specs().at(j.at("dataset").get<std::string>());
        std::vector<std::string> mask;
        if (j.contains("mask")) mask = j.at("mask").get<std::vector<std::string>>();
        const auto p = parse_numeric(text, spec, j.at("gt").get<double>(), UnitTable::defaults(), mask);
        r.expected_step = j.at("rule").get<std::string>();
        const char* rule = p.selection_rule == SelectionRule::single          ? "single"
                           : p.selection_rule == SelectionRule::closest_to_gt ? "closest_to_gt"
                                                                                : "none";
        bool value_ok;
        if (j.at("value").is_null()) {
          value_ok = !p.value && p.status == ParseStatus::unknown;
        } else {
          const double want = j.at("value").get<double>();
          value_ok = p.value && p.status == ParseStatus::ok && std::abs(*p.value - want) <= 1e-9 * std::max(1.0, std::abs(want));
        }
        r.passed = value_ok && r.expected_step == rule;
        r.detail = (p.value ? std::to_string(*p.value) : std::string("unknown")) + "/" + rule;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace testing
