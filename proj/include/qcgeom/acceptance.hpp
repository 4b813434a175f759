#pragma once

#include "qcgeom/io.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qcgeom {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::string summary;
  Json metrics;
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  // empty runs all nine
  std::vector<int> only;
  // large-construction settings shared by criteria 5 to 7
  int depth = 8;
  int L = 13;
  int porosity_samples = 500;
  int growth_depth = 6;
  int growth_L = 12;
  int growth_samples = 300;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// "PASS  5  porosity of the constructed boundary  12.3 s / 300 s  <summary>"
std::string format_result(const CriterionResult& r);

// Timings are left out unless asked for, so that reports are reproducible.
Json acceptance_to_json(const std::vector<CriterionResult>& results, bool with_timing = false);

}  // namespace qcgeom
