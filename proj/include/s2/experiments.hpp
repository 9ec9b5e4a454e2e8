#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <tuple>
#include <string>
#include <vector>

#include "s2/sim.hpp"

namespace s2::exp {

/// One CSV row. `replication` is the replication number, or "all" for
/// summary rows (metric names ending in _mean / _stderr).
struct Row {
  std::string preset;
  std::uint64_t seed = 0;
  std::string replication;
  double sweep = 0.0;
  std::string policy;
  std::string metric;
  double value = 0.0;
};

inline constexpr const char* kCsvHeader = "preset,seed,replication,sweep,policy,metric,value";

void write_csv(std::ostream& out, const std::vector<Row>& rows);
std::string format_value(double v);

/// Seed of replication r, shared by every policy and sweep point.
std::uint64_t replication_seed(std::uint64_t base, int r);

struct Stat {
  double mean = 0.0;
  double stderr_ = 0.0;
  int count = 0;
};

Stat summarize(const std::vector<double>& xs);

/// Pooled standard error of a difference of two means.
double pooled_stderr(const Stat& a, const Stat& b);

/// Collects per-replication values keyed by (sweep, policy, metric).
class Table {
 public:
  void add(double sweep, const std::string& policy, const std::string& metric, double v);
  Stat stat(double sweep, const std::string& policy, const std::string& metric) const;
  std::vector<double> sweeps() const;

 private:
  std::map<std::tuple<double, std::string, std::string>, std::vector<double>> data_;
};

struct PresetOptions {
  std::int64_t n = 0;            // 0 = preset default
  std::int64_t horizon = 100'000;
  int replications = 20;
  std::uint64_t seed = 1;
  std::vector<double> grid;      // empty = preset default
  std::int64_t d_max = 10;       // fig3a truncation
};

struct PresetResult {
  std::vector<Row> rows;
  Table table;
};

/// p_n ~ U[p_min, 0.5]; optimal_two_state vs separate_aoi.
PresetResult preset_fig2(const PresetOptions& o);

/// Two nodes, delta_1 = d with p_e,1 on the grid, delta_2 = e^d - 1 with
/// p_e,2 = 0.9; both walks reflect at d_max. Reports the simulated index
/// policy, the exact chain cost of the same policy, and the optimum.
PresetResult preset_fig3a(const PresetOptions& o);

/// Linear delta, p_e,n ~ U[0, 0.3], nu = 5/N, t_slot/t_c = 10; etsu
/// (mini_slot) vs centralized_whittle vs aoi_error_index.
PresetResult preset_fig3b(const PresetOptions& o);

/// Nodes on a line with position-dependent walk speed (a stand-in for the
/// measured CSI field); no expected values attached.
PresetResult preset_synth_field(const PresetOptions& o);

PresetResult run_preset(const std::string& name, const PresetOptions& o);

/// Runs every policy of a configuration over replications and an optional
/// numeric sweep (see docs/config.md).
struct SweepSpec {
  std::string variable;  // empty: no sweep
  std::vector<double> values;
};

struct RunSpec {
  sim::SimConfig base;
  std::vector<PolicyKind> policies;  // empty: base.policy only
  SweepSpec sweep;
  int replications = 1;
  std::string output;
};

std::vector<Row> run_spec(const RunSpec& spec);

}  // namespace s2::exp
