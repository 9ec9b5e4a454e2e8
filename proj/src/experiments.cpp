#include "s2/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "s2/mdp.hpp"

namespace s2::exp {

namespace {

double setup_draw(std::uint64_t seed, std::uint64_t node, std::uint64_t salt) {
  return CounterRng(seed).uniform(Stream::setup, node, salt);
}

void emit(PresetResult& out, const std::string& preset, std::uint64_t seed, int rep, double sweep,
          const std::string& policy, const sim::SimReport& r) {
  out.rows.push_back({preset, seed, std::to_string(rep), sweep, policy, "avg_weighted_error",
                      r.avg_weighted_error});
  out.rows.push_back({preset, seed, std::to_string(rep), sweep, policy, "avg_aoi", r.avg_aoi});
  out.table.add(sweep, policy, "avg_weighted_error", r.avg_weighted_error);
  out.table.add(sweep, policy, "avg_aoi", r.avg_aoi);
}

void emit_summary(PresetResult& out, const std::string& preset, std::uint64_t base_seed,
                  const std::vector<std::string>& policies) {
  for (double s : out.table.sweeps())
    for (const auto& p : policies)
      for (const char* m : {"avg_weighted_error", "avg_aoi", "fraction_above"}) {
        const Stat st = out.table.stat(s, p, m);
        if (st.count == 0) continue;
        out.rows.push_back({preset, base_seed, "all", s, p, std::string(m) + "_mean", st.mean});
        out.rows.push_back({preset, base_seed, "all", s, p, std::string(m) + "_stderr", st.stderr_});
      }
}

std::vector<double> grid_or(const PresetOptions& o, std::vector<double> fallback) {
  return o.grid.empty() ? fallback : o.grid;
}

void check_common(const PresetOptions& o) {
  if (o.horizon < 1) throw InvalidArgument("horizon must be at least 1");
  if (o.replications < 1) throw InvalidArgument("replications must be at least 1");
}

}  // namespace

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<Row>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows)
    out << r.preset << ',' << r.seed << ',' << r.replication << ',' << format_value(r.sweep) << ','
        << r.policy << ',' << r.metric << ',' << format_value(r.value) << '\n';
}

std::uint64_t replication_seed(std::uint64_t base, int r) {
  return detail::mix64(base * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(r) + 1);
}

Stat summarize(const std::vector<double>& xs) {
  Stat s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return s;
}

double pooled_stderr(const Stat& a, const Stat& b) {
  return std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
}

void Table::add(double sweep, const std::string& policy, const std::string& metric, double v) {
  data_[{sweep, policy, metric}].push_back(v);
}

Stat Table::stat(double sweep, const std::string& policy, const std::string& metric) const {
  const auto it = data_.find({sweep, policy, metric});
  return it == data_.end() ? Stat{} : summarize(it->second);
}

std::vector<double> Table::sweeps() const {
  std::set<double> s;
  for (const auto& [k, v] : data_) s.insert(std::get<0>(k));
  return {s.begin(), s.end()};
}

PresetResult preset_fig2(const PresetOptions& o) {
  check_common(o);
  const std::int64_t n = o.n > 0 ? o.n : 10;
  const auto grid = grid_or(o, {0.05, 0.1, 0.2, 0.3, 0.4});
  const std::vector<PolicyKind> kinds{PolicyKind::optimal_two_state, PolicyKind::separate_aoi};
  PresetResult out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double p_min = grid[g];
    if (!(p_min > 0.0 && p_min < 0.5)) throw InvalidArgument("fig2 grid values must be in (0, 0.5)");
    for (int r = 0; r < o.replications; ++r) {
      const std::uint64_t seed = replication_seed(o.seed, r);
      sim::SimConfig c;
      c.horizon = o.horizon;
      c.seed = seed;
      for (std::int64_t i = 0; i < n; ++i) {
        const double p = p_min + (0.5 - p_min) * setup_draw(seed, static_cast<std::uint64_t>(i), g);
        c.nodes.push_back({TwoStateSource::make(std::max(p, 1e-12)), ErrorFunction::linear(), 0.0});
      }
      for (PolicyKind k : kinds) {
        c.policy.kind = k;
        emit(out, "fig2", seed, r, p_min, to_string(k), sim::run(c));
      }
    }
  }
  emit_summary(out, "fig2", o.seed, {"optimal_two_state", "separate_aoi"});
  return out;
}

PresetResult preset_fig3a(const PresetOptions& o) {
  check_common(o);
  if (o.d_max < 1 || o.d_max > 20) throw InvalidArgument("fig3a d_max must be in 1..20");
  const auto grid = grid_or(o, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  PresetResult out;
  for (double pe1 : grid) {
    if (!(pe1 >= 0.0 && pe1 < 1.0)) throw InvalidArgument("fig3a grid values must be in [0, 1)");
    const std::vector<mdp::NodeSpec> spec{{ErrorFunction::linear(), pe1}, {ErrorFunction::exponential(), 0.9}};
    const double optimum = mdp::multi_node_optimal(spec, o.d_max).average_cost;
    WhittleTable t1(spec[0].f), t2(spec[1].f);
    const double exact = mdp::multi_node_policy_cost(spec, o.d_max, [&](std::span<const std::int64_t> d) {
      const double a = t1.unreliable(d[0], pe1), b = t2.unreliable(d[1], 0.9);
      if (a <= 0.0 && b <= 0.0) return mdp::kIdle;
      return b > a ? 1 : 0;
    });
    out.rows.push_back({"fig3a", o.seed, "all", pe1, "optimal", "avg_weighted_error", optimum});
    out.rows.push_back({"fig3a", o.seed, "all", pe1, "centralized_whittle", "exact_chain_cost", exact});
    out.table.add(pe1, "optimal", "avg_weighted_error", optimum);
    out.table.add(pe1, "centralized_whittle", "exact_chain_cost", exact);
    for (int r = 0; r < o.replications; ++r) {
      const std::uint64_t seed = replication_seed(o.seed, r);
      sim::SimConfig c;
      c.horizon = o.horizon;
      c.seed = seed;
      c.d_cap = o.d_max;
      c.nodes = {{RandomWalkSource::symmetric(), ErrorFunction::linear(), pe1},
                 {RandomWalkSource::symmetric(), ErrorFunction::exponential(), 0.9}};
      c.policy.kind = PolicyKind::centralized_whittle;
      emit(out, "fig3a", seed, r, pe1, "centralized_whittle", sim::run(c));
    }
  }
  emit_summary(out, "fig3a", o.seed, {"centralized_whittle"});
  return out;
}

PresetResult preset_fig3b(const PresetOptions& o) {
  check_common(o);
  const auto grid = grid_or(o, {10, 30, 50, 100});
  const std::vector<PolicyKind> kinds{PolicyKind::etsu, PolicyKind::centralized_whittle,
                                      PolicyKind::aoi_error_index};
  PresetResult out;
  for (double nf : grid) {
    const auto n = static_cast<std::int64_t>(std::llround(nf));
    if (n < 10) throw InvalidArgument("fig3b needs N >= 10");
    for (int r = 0; r < o.replications; ++r) {
      const std::uint64_t seed = replication_seed(o.seed, r);
      sim::SimConfig c;
      c.horizon = o.horizon;
      c.seed = seed;
      c.slot_ratio = 10.0;
      c.contention = sim::ContentionModel::mini_slot;
      for (std::int64_t i = 0; i < n; ++i)
        c.nodes.push_back({RandomWalkSource::symmetric(), ErrorFunction::linear(),
                           0.3 * setup_draw(seed, static_cast<std::uint64_t>(i), 0)});
      c.policy.nu = 5.0 / static_cast<double>(n);
      for (PolicyKind k : kinds) {
        c.policy.kind = k;
        emit(out, "fig3b", seed, r, nf, to_string(k), sim::run(c));
      }
    }
  }
  emit_summary(out, "fig3b", o.seed, {"etsu", "centralized_whittle", "aoi_error_index"});
  return out;
}

PresetResult preset_synth_field(const PresetOptions& o) {
  check_common(o);
  const std::int64_t n = o.n > 0 ? o.n : 40;
  const std::vector<PolicyKind> kinds{PolicyKind::centralized_whittle, PolicyKind::aoi_error_index,
                                      PolicyKind::max_difference, PolicyKind::round_robin};
  PresetResult out;
  for (int r = 0; r < o.replications; ++r) {
    const std::uint64_t seed = replication_seed(o.seed, r);
    sim::SimConfig c;
    c.horizon = o.horizon;
    c.seed = seed;
    for (std::int64_t i = 0; i < n; ++i) {
      // Position along a corridor sets how fast the local channel drifts;
      // nodes far from the sink also lose more packets.
      const double x = setup_draw(seed, static_cast<std::uint64_t>(i), 7);
      const double move = 0.9 - 0.7 * x;
      c.nodes.push_back({RandomWalkSource::make(move / 2, move / 2, 1.0 - move),
                         ErrorFunction::quadratic(), 0.3 * x});
    }
    for (PolicyKind k : kinds) {
      c.policy.kind = k;
      emit(out, "synth-field", seed, r, static_cast<double>(n), to_string(k), sim::run(c));
    }
  }
  emit_summary(out, "synth-field", o.seed,
               {"centralized_whittle", "aoi_error_index", "max_difference", "round_robin"});
  return out;
}

PresetResult run_preset(const std::string& name, const PresetOptions& o) {
  if (name == "fig2") return preset_fig2(o);
  if (name == "fig3a") return preset_fig3a(o);
  if (name == "fig3b") return preset_fig3b(o);
  if (name == "synth-field") return preset_synth_field(o);
  throw InvalidArgument("unknown preset '" + name + "'");
}

namespace {

void apply_sweep(sim::SimConfig& c, const std::string& var, double v) {
  if (var == "p_e") {
    for (auto& n : c.nodes) n.p_e = v;
  } else if (var == "nu") {
    c.policy.nu = v;
  } else if (var == "slot_ratio") {
    c.slot_ratio = v;
  } else if (var == "horizon") {
    c.horizon = std::llround(v);
  } else if (var == "d_cap") {
    c.d_cap = std::llround(v);
  } else if (var == "q_stay") {
    for (auto& n : c.nodes)
      if (std::holds_alternative<RandomWalkSource>(n.source))
        n.source = RandomWalkSource::make((1.0 - v) / 2, (1.0 - v) / 2, v);
  } else {
    throw InvalidArgument("unknown sweep variable '" + var + "'");
  }
}

}  // namespace

std::vector<Row> run_spec(const RunSpec& spec) {
  if (spec.replications < 1) throw InvalidArgument("replications must be at least 1");
  std::vector<PolicyKind> kinds = spec.policies;
  if (kinds.empty()) kinds.push_back(spec.base.policy.kind);
  std::vector<double> values = spec.sweep.values;
  const bool sweeping = !spec.sweep.variable.empty();
  if (!sweeping) values = {0.0};
  PresetResult out;
  std::vector<std::string> names;
  for (PolicyKind k : kinds) names.push_back(to_string(k));
  for (double v : values) {
    for (int r = 0; r < spec.replications; ++r) {
      sim::SimConfig c = spec.base;
      c.seed = replication_seed(spec.base.seed, r);
      if (sweeping) apply_sweep(c, spec.sweep.variable, v);
      for (PolicyKind k : kinds) {
        c.policy.kind = k;
        const auto rep = sim::run(c);
        emit(out, "run", c.seed, r, v, to_string(k), rep);
        if (c.track_threshold > 0) {
          out.rows.push_back({"run", c.seed, std::to_string(r), v, to_string(k), "fraction_above", rep.fraction_above});
          out.table.add(v, to_string(k), "fraction_above", rep.fraction_above);
        }
      }
    }
  }
  emit_summary(out, "run", spec.base.seed, names);
  return out.rows;
}

}  // namespace s2::exp
