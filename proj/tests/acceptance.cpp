// Acceptance run: one PASS/FAIL line per criterion, indented detail below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "s2/experiments.hpp"
#include "s2/policies.hpp"
#include "s2/sim.hpp"
#include "s2/verify.hpp"

using namespace s2;

namespace {

constexpr double kFig3aRel = 0.05;
constexpr double kFig3bRel = 0.25;
constexpr double kFig3bLogged = 0.10;
constexpr double kFixedPointRel = 0.15;
constexpr double kZ = 2.0;

struct Verdict {
  bool passed = true;
  std::string summary;
  std::vector<std::string> lines;
};

std::string fmt(const char* pattern, double v) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

Verdict from_checks(std::vector<verify::CheckResult> checks, double seconds, double limit) {
  Verdict o;
  for (const auto& c : checks) {
    o.passed = o.passed && c.passed;
    o.lines.push_back(c.name + ": " + c.detail);
    for (const auto& t : c.table) o.lines.push_back("  " + t);
    if (!c.passed) o.lines.push_back("  offending instance " + c.instance);
  }
  if (limit > 0.0) {
    o.lines.push_back(fmt("runtime %.2f s", seconds) + fmt(" (limit %.0f s)", limit));
    o.passed = o.passed && seconds < limit;
  }
  o.summary = o.passed ? "all instances within tolerance" : "see detail";
  return o;
}

Verdict criterion8() {
  exp::PresetOptions opt;
  opt.horizon = 1'000'000;
  opt.replications = 10;
  opt.d_max = 10;
  const auto res = exp::preset_fig3a(opt);
  Verdict o;
  double worst = 0.0, worst_exact = 0.0;
  for (double pe1 : res.table.sweeps()) {
    const double opt_cost = res.table.stat(pe1, "optimal", "avg_weighted_error").mean;
    const auto sim = res.table.stat(pe1, "centralized_whittle", "avg_weighted_error");
    const double exact = res.table.stat(pe1, "centralized_whittle", "exact_chain_cost").mean;
    const double rel = (sim.mean - opt_cost) / opt_cost;
    const double rel_exact = (exact - opt_cost) / opt_cost;
    worst = std::max(worst, std::abs(rel));
    worst_exact = std::max(worst_exact, rel_exact);
    const bool ok = std::abs(rel) <= kFig3aRel;
    o.passed = o.passed && ok;
    o.lines.push_back(fmt("p_e1=%.1f", pe1) + fmt(" optimum %.3f", opt_cost) + fmt(" simulated %.3f", sim.mean) +
                      fmt(" (se %.3f)", sim.stderr_) + fmt(" rel %+.4f", rel) + fmt(" exact-chain rel %+.4f", rel_exact) +
                      (ok ? "" : "  <- over limit"));
  }
  o.summary = fmt("worst simulated relative gap %.4f", worst) + fmt(" (limit %.2f)", kFig3aRel) +
              fmt(", worst exact-chain gap %.4f", worst_exact);
  return o;
}

Verdict criterion9() {
  exp::PresetOptions opt;
  opt.n = 10;
  opt.horizon = 100'000;
  opt.replications = 20;
  const auto res = exp::preset_fig2(opt);
  Verdict o;
  double min_z = 1e300;
  for (double p : res.table.sweeps()) {
    const auto a = res.table.stat(p, "optimal_two_state", "avg_weighted_error");
    const auto b = res.table.stat(p, "separate_aoi", "avg_weighted_error");
    const double z = (b.mean - a.mean) / exp::pooled_stderr(a, b);
    min_z = std::min(min_z, z);
    const bool ok = a.mean < b.mean && z > kZ;
    o.passed = o.passed && ok;
    o.lines.push_back(fmt("p_min=%.2f", p) + fmt(" optimal %.5f", a.mean) + fmt(" separate %.5f", b.mean) +
                      fmt(" gap/pooled se %.1f", z) + (ok ? "" : "  <- fails"));
  }
  o.summary = fmt("smallest gap %.1f pooled standard errors", min_z) + fmt(" (need > %.0f)", kZ);
  return o;
}

Verdict criterion10() {
  exp::PresetOptions opt;
  opt.horizon = 100'000;
  opt.replications = 20;
  const auto res = exp::preset_fig3b(opt);
  Verdict o;
  bool order_ok = true, near_ok = true;
  for (double n : res.table.sweeps()) {
    const auto e = res.table.stat(n, "etsu", "avg_weighted_error");
    const auto c = res.table.stat(n, "centralized_whittle", "avg_weighted_error");
    const auto b = res.table.stat(n, "aoi_error_index", "avg_weighted_error");
    const double z = (b.mean - e.mean) / exp::pooled_stderr(e, b);
    const double rel = (e.mean - c.mean) / c.mean;
    const bool beats = e.mean <= b.mean && z > kZ;
    order_ok = order_ok && beats;
    std::string line = fmt("N=%.0f", n) + fmt(" etsu %.4f", e.mean) + fmt(" centralized %.4f", c.mean) +
                       fmt(" aoi baseline %.4f", b.mean) + fmt(" baseline-etsu %.1f se", z) +
                       fmt(" etsu vs centralized %+.3f", rel);
    if (!beats) line += "  <- etsu not below baseline";
    if (n >= 50) {
      const bool near = rel <= kFig3bRel;
      near_ok = near_ok && near;
      if (!near) line += fmt("  <- over %.2f", kFig3bRel);
    }
    if (n == 50) line += rel <= kFig3bLogged ? "  (within the logged 10% figure)" : "  (outside the logged 10% figure)";
    o.lines.push_back(line);
  }
  o.passed = order_ok && near_ok;
  o.summary = std::string("ordering vs baseline ") + (order_ok ? "holds" : "violated") +
              ", closeness to centralized at N >= 50 " + (near_ok ? "holds" : "violated");
  return o;
}

Verdict criterion11() {
  const double nu = 0.1, ratio = 10.0;
  sim::SimConfig c;
  c.nodes.assign(500, NodeParams{});
  c.horizon = 100'000;
  c.seed = 11;
  c.policy = {PolicyKind::etsu, nu};
  c.slot_ratio = ratio;
  const auto plan = etsu_plan(c.nodes, nu, ratio);
  c.track_threshold = plan.d_th;
  const auto r = sim::run(c);
  const double rel = (r.fraction_above - nu) / nu;
  Verdict o;
  o.passed = std::abs(rel) <= kFixedPointRel;
  o.summary = fmt("fraction with d >= D_th %.4f", r.fraction_above) + fmt(" vs nu %.2f", nu) +
              fmt(", relative %+.3f", rel) + fmt(" (limit %.2f)", kFixedPointRel);
  o.lines.push_back("D_th " + std::to_string(plan.d_th) + fmt(" (root %.4f)", plan.root) +
                    fmt(", p_tx %.6f", plan.p_tx) + fmt(", I_th %.3f", plan.i_th));
  const double frames = static_cast<double>(r.successes + r.channel_failures + r.collisions + r.idles);
  o.lines.push_back(fmt("deliveries per slot %.4f", static_cast<double>(r.successes) / r.elapsed) +
                    fmt(", collision share of frames %.4f", static_cast<double>(r.collisions) / frames) +
                    fmt(", idle mini-slots per frame %.3f", static_cast<double>(r.idle_minislots) / frames));
  return o;
}

Verdict criterion12() {
  Verdict o;
  struct Job {
    const char* name;
    exp::PresetOptions opt;
  };
  std::vector<Job> jobs;
  exp::PresetOptions small;
  small.horizon = 3000;
  small.replications = 2;
  jobs.push_back({"fig2", small});
  jobs.back().opt.grid = {0.1, 0.3};
  jobs.push_back({"fig3a", small});
  jobs.back().opt.grid = {0.0, 0.5};
  jobs.push_back({"fig3b", small});
  jobs.back().opt.grid = {10, 30};
  jobs.push_back({"synth-field", small});
  for (const auto& j : jobs) {
    std::ostringstream a, b;
    exp::write_csv(a, exp::run_preset(j.name, j.opt).rows);
    exp::write_csv(b, exp::run_preset(j.name, j.opt).rows);
    const bool same = a.str() == b.str();
    o.passed = o.passed && same;
    o.lines.push_back(std::string(j.name) + ": " + std::to_string(a.str().size()) + " bytes, " +
                      (same ? "identical" : "DIFFERENT"));
  }
  o.summary = o.passed ? "every preset reproduced byte for byte" : "output differs between runs";
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  verify::SuiteOptions full;
  struct Criterion {
    int id;
    const char* title;
    std::function<Verdict(double&)> run;
  };
  auto timed_checks = [&](std::function<std::vector<verify::CheckResult>()> f, double limit) {
    return [f, limit](double& seconds) {
      const auto t0 = clock::now();
      auto checks = f();
      seconds = std::chrono::duration<double>(clock::now() - t0).count();
      return from_checks(std::move(checks), seconds, limit);
    };
  };
  auto plain = [](std::function<Verdict()> f) {
    return [f](double&) { return f(); };
  };
  const std::vector<Criterion> criteria{
      {1, "greedy two-state rule equals backwards induction",
       timed_checks([&] { return std::vector{verify::check_greedy_two_state(full)}; }, 60.0)},
      {2, "closed-form index equals numeric Whittle index",
       timed_checks([&] { return std::vector{verify::check_closed_index(full)}; }, 120.0)},
      {3, "indexability certified", timed_checks([&] { return std::vector{verify::check_indexability(full)}; }, 0.0)},
      {4, "unreliable-channel index gap at p_e = 0.05",
       timed_checks([&] { return std::vector{verify::check_unreliable_gap(full)}; }, 0.0)},
      {5, "closed-form threshold equals numeric root",
       timed_checks([&] { return std::vector{verify::check_closed_threshold(full)}; }, 0.0)},
      {6, "stationary law residuals and sigma monotonicity",
       timed_checks([&] { return std::vector{verify::check_stationary(full), verify::check_sigma_monotone(full)}; },
                    0.0)},
      {7, "contention probability root", timed_checks([&] { return std::vector{verify::check_contention_root(full)}; }, 0.0)},
      {8, "two-node index policy near the optimum", [](double& seconds) {
         const auto t0 = clock::now();
         auto o = criterion8();
         seconds = std::chrono::duration<double>(clock::now() - t0).count();
         o.lines.push_back(fmt("runtime %.1f s (limit 600 s)", seconds));
         o.passed = o.passed && seconds < 600.0;
         return o;
       }},
      {9, "joint sampling and scheduling beats the separate design", plain(criterion9)},
      {10, "ETSU against the centralized index and the AoI baseline", plain(criterion10)},
      {11, "mean-field fixed point with 500 nodes", plain(criterion11)},
      {12, "presets are deterministic", plain(criterion12)},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    double seconds = 0.0;
    const auto t0 = clock::now();
    const auto o = c.run(seconds);
    const double wall = std::chrono::duration<double>(clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", c.id, c.title, o.summary.c_str(), wall);
    for (const auto& l : o.lines) std::printf("        %s\n", l.c_str());
    std::fflush(stdout);
    failed += !o.passed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
