#include "s2/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "s2/indices.hpp"
#include "s2/mdp.hpp"

namespace s2::verify {

namespace {

using nlohmann::json;

std::string fmt_double(const char* pattern, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::vector<ErrorFunction> builtin_kinds() {
  return {ErrorFunction::linear(), ErrorFunction::quadratic(), ErrorFunction::exponential(),
          ErrorFunction::indicator()};
}

std::vector<ErrorFunction> index_family(std::mt19937_64& gen, int tabulated) {
  auto fs = builtin_kinds();
  for (int i = 0; i < tabulated; ++i) fs.push_back(random_tabulated(gen));
  return fs;
}

json describe(const ErrorFunction& f) {
  json j{{"kind", f.name()}, {"weight", f.weight()}};
  if (f.kind() == ErrorKind::tabulated) j["values"] = f.table();
  return j;
}

}  // namespace

ErrorFunction random_tabulated(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> step(0.0, 1.0);
  std::vector<double> v{0.0, 0.05 + step(gen)};
  for (int d = 2; d <= 40; ++d) {
    // about a third of the steps are flat
    const double s = step(gen);
    v.push_back(v.back() + (s < 0.33 ? 0.0 : 2.0 * step(gen)));
  }
  return ErrorFunction::tabulated(std::move(v), Extension::hold);
}

std::vector<SparseRow> mean_field_rows(const meanfield::MeanFieldChain& c, std::size_t states) {
  const auto dth = static_cast<std::size_t>(c.d_th);
  const double gamma = 1.0 - c.lambda - c.mu;
  std::vector<SparseRow> rows(states);
  for (std::size_t i = 0; i < states; ++i) {
    auto& r = rows[i].to;
    const std::size_t up = std::min(i + 1, states - 1);
    if (i == 0) {
      r.push_back({0, 1.0 - c.lambda});
      r.push_back({up, c.lambda});
    } else if (i < dth) {
      r.push_back({i - 1, c.mu});
      r.push_back({i, gamma});
      r.push_back({up, c.lambda});
    } else {
      const double keep = 1.0 - c.eps;
      r.push_back({0, c.eps});
      r.push_back({i - 1, keep * c.mu});
      r.push_back({i, keep * gamma});
      r.push_back({up, keep * c.lambda});
    }
  }
  return rows;
}

double stationary_residual(const meanfield::MeanFieldChain& chain, const std::vector<double>& pi) {
  const auto rows = mean_field_rows(chain, pi.size());
  std::vector<double> next(pi.size(), 0.0);
  for (std::size_t i = 0; i < pi.size(); ++i)
    for (const auto& [j, p] : rows[i].to) next[j] += pi[i] * p;
  double worst = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) worst = std::max(worst, std::abs(next[i] - pi[i]));
  return worst;
}

CheckResult check_greedy_two_state(const SuiteOptions& o) {
  CheckResult out;
  out.name = "greedy_vs_backwards_induction";
  std::mt19937_64 gen(o.seed);
  std::uniform_real_distribution<double> unif(0.0, 0.5);
  const int instances = o.quick ? 50 : 200;
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(k % 2);
    const int horizon = (k / 2) % 2 == 0 ? 4 : 8;
    std::vector<double> p(n);
    for (auto& x : p) {
      x = unif(gen);
      if (x <= 0.0) x = 0.5;  // (0, 0.5]
    }
    const auto plan = mdp::two_state_backwards_induction(p, horizon);
    const auto greedy = mdp::two_state_policy_value(
        p, horizon, [&](int, std::uint32_t mask) { return mdp::theorem1_policy(mask, p); });
    for (std::size_t x = 0; x < greedy.size(); ++x) {
      const double gap = std::abs(greedy[x] - plan.value[0][x]);
      worst = std::max(worst, gap);
      if (gap > 1e-12 && out.passed) {
        out.passed = false;
        out.instance = json{{"p", p}, {"T", horizon}, {"mask", x}, {"greedy", greedy[x]},
                            {"optimum", plan.value[0][x]}}.dump();
      }
    }
  }
  out.detail = std::to_string(instances) + " instances, max |greedy - optimum| = " + fmt_double("%.3g", worst);
  return out;
}

CheckResult check_closed_index(const SuiteOptions& o) {
  CheckResult out;
  out.name = "closed_index_vs_numeric_whittle";
  std::mt19937_64 gen(o.seed + 1);
  const auto fs = index_family(gen, o.quick ? 3 : 10);
  double worst = 0.0;
  for (const auto& f : fs)
    for (std::int64_t d = 1; d <= 20; ++d) {
      const double closed = whittle_random_walk(d, f);
      const double numeric = mdp::numeric_whittle(d, f, 0.0);
      const double gap = std::abs(closed - numeric);
      worst = std::max(worst, gap);
      if (gap > 1e-3 && out.passed) {
        out.passed = false;
        out.instance = json{{"f", describe(f)}, {"d", d}, {"closed", closed}, {"numeric", numeric}}.dump();
      }
    }
  out.detail = std::to_string(fs.size()) + " error functions x d = 1..20, max abs gap = " + fmt_double("%.3g", worst);
  return out;
}

CheckResult check_indexability(const SuiteOptions& o) {
  CheckResult out;
  out.name = "indexability";
  std::mt19937_64 gen(o.seed + 1);
  const auto fs = index_family(gen, o.quick ? 3 : 10);
  const int points = o.quick ? 41 : 161;
  int certified = 0;
  for (const auto& f : fs)
    for (double p_e : {0.0, 0.05, 0.2}) {
      const double top = 2.0 * whittle_random_walk(20, f);
      std::vector<double> grid(static_cast<std::size_t>(points));
      for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = top * i / (points - 1);
      const auto r = mdp::indexability_check(f, p_e, grid, 20, true);
      if (r.certified) {
        ++certified;
      } else if (out.passed) {
        out.passed = false;
        out.instance = json{{"f", describe(f)}, {"p_e", p_e}, {"m_low", r.m_low}, {"m_high", r.m_high},
                            {"d", r.d}, {"reason", r.reason}}.dump();
      }
    }
  out.detail = std::to_string(certified) + " of " + std::to_string(fs.size() * 3) + " (f, p_e) pairs certified";
  return out;
}

CheckResult check_unreliable_gap(const SuiteOptions&) {
  CheckResult out;
  out.name = "unreliable_index_gap";
  const auto f = ErrorFunction::linear();
  double worst_005 = 0.0;
  for (double p_e : {0.01, 0.05, 0.1, 0.2}) {
    std::string line = "p_e=" + fmt_double("%.2f", p_e) + " rel gap d=1..10:";
    for (std::int64_t d = 1; d <= 10; ++d) {
      const double approx = whittle_random_walk_unreliable(d, f, p_e);
      const double numeric = mdp::numeric_whittle(d, f, p_e);
      const double rel = std::abs(approx - numeric) / numeric;
      line += " " + fmt_double("%.4f", rel);
      if (p_e == 0.05) {
        worst_005 = std::max(worst_005, rel);
        if (rel > 0.05 && out.passed) {
          out.passed = false;
          out.instance = json{{"p_e", p_e}, {"d", d}, {"approx", approx}, {"numeric", numeric}}.dump();
        }
      }
    }
    out.table.push_back(line);
  }
  out.detail = "linear delta, worst relative gap at p_e = 0.05: " + fmt_double("%.4f", worst_005) + " (limit 0.05)";
  return out;
}

CheckResult check_closed_threshold(const SuiteOptions& o) {
  CheckResult out;
  out.name = "closed_threshold_vs_numeric_root";
  std::mt19937_64 gen(o.seed + 2);
  std::uniform_real_distribution<double> nu_d(0.01, 0.9);
  std::uniform_int_distribution<int> n_d(10, 2000);
  const int instances = o.quick ? 15 : 50;
  double worst = 0.0;
  for (int k = 0; k < instances;) {
    const double nu = nu_d(gen);
    const double n = n_d(gen);
    if (!(nu * n > 1.5)) continue;
    ++k;
    const double closed = meanfield::closed_form_threshold(0.5, nu, n);
    const double numeric = meanfield::solve_threshold(0.5, 0.5, nu, n).root;
    const double gap = std::abs(closed - numeric);
    worst = std::max(worst, gap);
    if (gap > 1e-6 && out.passed) {
      out.passed = false;
      out.instance = json{{"nu", nu}, {"N", n}, {"closed", closed}, {"numeric", numeric}}.dump();
    }
  }
  out.detail = std::to_string(instances) + " instances, max |closed - numeric| = " + fmt_double("%.3g", worst);
  return out;
}

CheckResult check_contention_root(const SuiteOptions&) {
  CheckResult out;
  out.name = "contention_probability_root";
  const double p1 = meanfield::solve_ptx(1.0, 1.0, 1.0);
  const double p2 = meanfield::solve_ptx(1.0, 2.0, 1.0);
  if (p1 != 1.0 || std::abs(p2 - 0.5) > 1e-12) {
    out.passed = false;
    out.instance = json{{"p_tx(nuN=1)", p1}, {"p_tx(nuN=2)", p2}}.dump();
  }
  double worst = 0.0;
  int multi_root = 0;
  for (std::int64_t k = 1; k <= 200; k += (k < 20 ? 1 : 9))
    for (double ratio : {0.5, 1.0, 2.0, 10.0, 100.0}) {
      const double p = meanfield::solve_ptx(1.0, static_cast<double>(k), ratio);
      const double res = std::abs(meanfield::ptx_residual(p, k, ratio));
      worst = std::max(worst, res);
      int changes = 0;
      double prev = meanfield::ptx_residual(1e-9, k, ratio);
      for (int i = 1; i <= 2000; ++i) {
        const double cur = meanfield::ptx_residual(i / 2000.0, k, ratio);
        if ((prev > 0.0) != (cur > 0.0) && cur != 0.0) ++changes;
        prev = cur;
      }
      if (changes > 1) ++multi_root;
      if ((res > 1e-10 || changes > 1) && out.passed) {
        out.passed = false;
        out.instance = json{{"K", k}, {"ratio", ratio}, {"p", p}, {"residual", res}, {"sign_changes", changes}}.dump();
      }
    }
  out.detail = "p_tx(1,1) = " + fmt_double("%.12g", p1) + ", p_tx(2,1) = " + fmt_double("%.12g", p2) +
               ", max residual " + fmt_double("%.3g", worst) + ", grids with >1 sign change: " +
               std::to_string(multi_root);
  return out;
}

CheckResult check_stationary(const SuiteOptions& o) {
  CheckResult out;
  out.name = "stationary_distribution";
  std::mt19937_64 gen(o.seed + 3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int instances = o.quick ? 25 : 100;
  double worst_res = 0.0, worst_sum = 0.0;
  for (int k = 0; k < instances; ++k) {
    meanfield::MeanFieldChain c;
    c.lambda = 0.05 + 0.45 * unif(gen);
    c.mu = 0.05 + (0.95 - c.lambda) * unif(gen);
    c.eps = 0.01 + 0.99 * unif(gen);
    c.d_th = 1 + static_cast<std::int64_t>(30 * unif(gen));
    const auto st = meanfield::stationary_distribution(c);
    double sum = 0.0;
    for (double v : st.pi) sum += v;
    c.k = st.k;
    const double res = stationary_residual(c, st.pi);
    worst_res = std::max(worst_res, res);
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    if ((res >= 1e-8 || std::abs(sum - 1.0) > 1e-10) && out.passed) {
      out.passed = false;
      out.instance = json{{"lambda", c.lambda}, {"mu", c.mu}, {"eps", c.eps}, {"d_th", c.d_th},
                          {"residual", res}, {"sum_error", sum - 1.0}}.dump();
    }
  }
  out.detail = std::to_string(instances) + " chains, max residual " + fmt_double("%.3g", worst_res) +
               ", max |sum - 1| " + fmt_double("%.3g", worst_sum);
  return out;
}

CheckResult check_sigma_monotone(const SuiteOptions& o) {
  CheckResult out;
  out.name = "sigma_monotone";
  std::mt19937_64 gen(o.seed + 4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int chains = 10;
  for (int k = 0; k < chains; ++k) {
    meanfield::MeanFieldChain c;
    c.lambda = 0.1 + 0.4 * unif(gen);
    c.mu = 0.1 + (0.9 - c.lambda) * unif(gen);
    c.eps = 0.02 + 0.5 * unif(gen);
    double prev = 2.0;
    for (std::int64_t d = 1; d <= 100; ++d) {
      c.d_th = d;
      const double sigma = meanfield::stationary_distribution(c).sigma;
      if (sigma > prev + 1e-12 && out.passed) {
        out.passed = false;
        out.instance = json{{"lambda", c.lambda}, {"mu", c.mu}, {"eps", c.eps}, {"d_th", d},
                            {"sigma", sigma}, {"previous", prev}}.dump();
      }
      prev = sigma;
    }
  }
  out.detail = std::to_string(chains) + " chains, d_th = 1..100";
  return out;
}

CheckResult check_aoi_threshold(const SuiteOptions&) {
  CheckResult out;
  out.name = "aoi_threshold_vs_aoi_arm";
  const std::vector<std::pair<std::string, AoiCost>> costs{
      {"h", [](std::int64_t h) { return static_cast<double>(h); }},
      {"h^2", [](std::int64_t h) { return static_cast<double>(h * h); }},
      {"sqrt(h)", [](std::int64_t h) { return std::sqrt(static_cast<double>(h)); }},
  };
  double worst = 0.0;
  for (const auto& [name, g] : costs) {
    std::string line = "g=" + name + " rel gap at p_e=0.1, H=2..8:";
    for (std::int64_t h = 1; h <= 8; ++h) {
      const double closed = nonlinear_aoi_index(h, g, 0.0);
      const double numeric = mdp::aoi_numeric_index(h, g, 0.0);
      const double gap = std::abs(closed - numeric);
      worst = std::max(worst, gap);
      if (gap > 1e-6 && out.passed) {
        out.passed = false;
        out.instance = json{{"g", name}, {"H", h}, {"closed", closed}, {"numeric", numeric}}.dump();
      }
      if (h >= 2) {
        const double a = nonlinear_aoi_index(h, g, 0.1), b = mdp::aoi_numeric_index(h, g, 0.1);
        line += " " + fmt_double("%.4f", std::abs(a - b) / b);
      }
    }
    out.table.push_back(line);
  }
  out.detail = "p_e = 0, H = 1..8, max abs gap " + fmt_double("%.3g", worst);
  return out;
}

std::vector<CheckResult> run_suite(const SuiteOptions& o) {
  return {check_greedy_two_state(o),    check_closed_index(o),        check_indexability(o),
          check_unreliable_gap(o),  check_closed_threshold(o), check_contention_root(o),
          check_stationary(o),  check_sigma_monotone(o), check_aoi_threshold(o)};
}

}  // namespace s2::verify
