#pragma once

#include <random>
#include <string>
#include <vector>

#include "s2/domain.hpp"
#include "s2/meanfield.hpp"

namespace s2::verify {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;    // one-line summary
  std::string instance;  // offending instance (JSON) when failed
  std::vector<std::string> table;  // optional report lines
};

struct SuiteOptions {
  bool quick = false;
  unsigned seed = 2024;
};

/// Non-decreasing tabulated delta on 0..40 with delta(1) > 0, held past 40.
ErrorFunction random_tabulated(std::mt19937_64& gen);

/// Transition rows of the truncated mean-field chain, built entry by entry.
struct SparseRow {
  std::vector<std::pair<std::size_t, double>> to;
};
std::vector<SparseRow> mean_field_rows(const meanfield::MeanFieldChain& chain, std::size_t states);

/// max_j |(pi P)_j - pi_j|
double stationary_residual(const meanfield::MeanFieldChain& chain, const std::vector<double>& pi);

CheckResult check_greedy_two_state(const SuiteOptions& o);
CheckResult check_closed_index(const SuiteOptions& o);
CheckResult check_indexability(const SuiteOptions& o);
CheckResult check_unreliable_gap(const SuiteOptions& o);
CheckResult check_closed_threshold(const SuiteOptions& o);
CheckResult check_contention_root(const SuiteOptions& o);
CheckResult check_stationary(const SuiteOptions& o);
CheckResult check_sigma_monotone(const SuiteOptions& o);
CheckResult check_aoi_threshold(const SuiteOptions& o);

std::vector<CheckResult> run_suite(const SuiteOptions& o);

}  // namespace s2::verify
