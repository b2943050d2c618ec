#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluxlab/random_field.hpp"
#include "fluxlab/torus.hpp"

namespace fluxlab {

struct SuiteOptions {
  std::vector<int> L_list{2, 3, 4};
  int trials = 100;
  double b = kPi / 4.0;
  DensityMode mode = DensityMode::symmetric;
  double E_star = 1.0;
  double eps = 0.1;
  int gauge_variant = 2;
  std::uint64_t master_seed = 0x5eed2024ull;
  // Deliberately corrupts one bond angle inside the gauge-invariance suite;
  // a negative control proving the harness can fail.
  bool inject_bug = false;
};

struct SuiteResult {
  std::string name;
  bool pass = false;
  long trials = 0;
  long checks = 0;
  long skipped = 0;        // instances outside a suite's preconditions
  double worst_error = 0.0;
  double tolerance = 0.0;
  long failing_trial = -1;  // replay: same options, this sample index
  std::string detail;
};

// Names in canonical order. The identity group is the fast algebra batch;
// the regularity group exercises the square certificates and current bounds.
const std::vector<std::string>& suite_names();
std::vector<std::string> identity_suite_names();
std::vector<std::string> regularity_suite_names();

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts);
std::vector<SuiteResult> run_all_suites(const SuiteOptions& opts);

std::string suite_report(const std::vector<SuiteResult>& results);

}  // namespace fluxlab
