#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "s2/mdp.hpp"

namespace s2::mdp {

namespace {

double q_value(const ArmChoice& c, double m, const std::vector<double>& f) {
  double q = c.cost + c.m_coef * m;
  for (const auto& t : c.next) q += t.prob * f[static_cast<std::size_t>(t.to)];
  return q;
}

double tie_tolerance(double scale) { return 1e-11 * std::max(1.0, std::abs(scale)); }

// One Bellman sweep; ties go to idle.
void bellman(const ArmModel& model, double m, const std::vector<double>& f,
             std::vector<double>& tf, std::vector<char>& update) {
  for (std::size_t s = 0; s < model.size(); ++s) {
    const double qi = q_value(model.idle[s], m, f);
    if (model.update[s].available) {
      const double qu = q_value(model.update[s], m, f);
      update[s] = qu < qi;
      tf[s] = update[s] ? qu : qi;
    } else {
      update[s] = 0;
      tf[s] = qi;
    }
  }
}

std::vector<char> greedy(const ArmModel& model, double m, const std::vector<double>& f) {
  std::vector<char> update(model.size(), 0);
  for (std::size_t s = 0; s < model.size(); ++s) {
    if (!model.update[s].available) continue;
    const double qi = q_value(model.idle[s], m, f);
    const double qu = q_value(model.update[s], m, f);
    update[s] = qu < qi - tie_tolerance(qi);
  }
  return update;
}

void check_model(const ArmModel& model) {
  if (model.size() == 0 || model.update.size() != model.size())
    throw InvalidArgument("arm model needs matching idle/update tables");
  if (model.reference < 0 || static_cast<std::size_t>(model.reference) >= model.size())
    throw InvalidArgument("arm model reference state out of range");
  if (!(model.damping > 0.0 && model.damping <= 1.0))
    throw InvalidArgument("damping must be in (0, 1]");
}

// Relative values of a fixed policy split as x0 + m * x1 (long double LU),
// then the m at which Q(update) - Q(idle) vanishes at `state`.
double affine_gap_root(const ArmModel& model, const std::vector<char>& update, int state) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const auto n = static_cast<Eigen::Index>(model.size());
  const auto ref = static_cast<Eigen::Index>(model.reference);
  Mat a = Mat::Zero(n, n);
  Mat rhs(n, 2);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto su = static_cast<std::size_t>(s);
    const ArmChoice& c = update[su] ? model.update[su] : model.idle[su];
    rhs(s, 0) = c.cost;
    rhs(s, 1) = c.m_coef;
    if (s != ref) a(s, s) += 1.0L;
    for (const auto& t : c.next)
      if (t.to != model.reference) a(s, t.to) -= static_cast<long double>(t.prob);
    a(s, ref) += 1.0L;
  }
  const Mat x = a.partialPivLu().solve(rhs);
  auto q = [&](const ArmChoice& c, int col) {
    long double v = col == 0 ? static_cast<long double>(c.cost) : static_cast<long double>(c.m_coef);
    for (const auto& t : c.next)
      if (t.to != model.reference) v += static_cast<long double>(t.prob) * x(t.to, col);
    return v;
  };
  const auto s = static_cast<std::size_t>(state);
  const long double g0 = q(model.update[s], 0) - q(model.idle[s], 0);
  const long double g1 = q(model.update[s], 1) - q(model.idle[s], 1);
  if (g1 == 0.0L) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(-g0 / g1);
}

}  // namespace

ArmSolution evaluate_arm_policy(const ArmModel& model, double m, const std::vector<char>& update) {
  check_model(model);
  const auto n = static_cast<Eigen::Index>(model.size());
  const auto ref = static_cast<Eigen::Index>(model.reference);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto su = static_cast<std::size_t>(s);
    const ArmChoice& c = update[su] ? model.update[su] : model.idle[su];
    rhs(s) = c.cost + c.m_coef * m;
    if (s != ref) a(s, s) += 1.0;
    for (const auto& t : c.next)
      if (t.to != model.reference) a(s, t.to) -= t.prob;
    a(s, ref) += 1.0;  // average-cost column
  }
  const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
  ArmSolution out;
  out.average_cost = x(ref);
  out.relative.assign(model.size(), 0.0);
  for (Eigen::Index s = 0; s < n; ++s)
    if (s != ref) out.relative[static_cast<std::size_t>(s)] = x(s);
  out.update = update;
  return out;
}

double arm_action_gap(const ArmModel& model, double m, const std::vector<double>& relative,
                      int state) {
  const auto s = static_cast<std::size_t>(state);
  if (!model.update[s].available) return std::numeric_limits<double>::infinity();
  return q_value(model.update[s], m, relative) - q_value(model.idle[s], m, relative);
}

ArmSolution solve_arm(const ArmModel& model, double m, const RviOptions& options,
                      const std::vector<double>* warm_start) {
  check_model(model);
  const std::size_t n = model.size();
  const auto ref = static_cast<std::size_t>(model.reference);
  std::vector<double> f(n, 0.0);
  if (warm_start != nullptr && warm_start->size() == n) {
    f = *warm_start;
    const double pin = f[ref];
    for (double& v : f) v -= pin;
  }
  std::vector<double> tf(n);
  std::vector<char> update(n, 0);

  ArmSolution out;
  bool converged = false;
  for (long k = 0; k < options.max_iterations; ++k) {
    bellman(model, m, f, tf, update);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double scale = 1.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double g = tf[s] - f[s];
      lo = std::min(lo, g);
      hi = std::max(hi, g);
      scale = std::max(scale, std::abs(f[s]));
    }
    out.iterations = k + 1;
    out.residual = hi - lo;
    out.average_cost = 0.5 * (hi + lo);
    if (out.residual <= options.tolerance * scale) {
      converged = true;
      break;
    }
    const double g_ref = tf[ref] - f[ref];
    for (std::size_t s = 0; s < n; ++s) f[s] += model.damping * ((tf[s] - f[s]) - g_ref);
  }
  if (!converged)
    throw SolverError("relative value iteration did not converge; span residual " +
                      std::to_string(out.residual));

  if (!options.polish) {
    out.relative = f;
    out.update = greedy(model, m, f);
    return out;
  }

  // Exact policy iteration from the RVI policy. A state only switches action
  // on a strict improvement, so the loop cannot cycle between tied actions.
  std::vector<char> policy = greedy(model, m, f);
  ArmSolution exact;
  for (int round = 0; round < 200; ++round) {
    exact = evaluate_arm_policy(model, m, policy);
    bool changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (!model.update[s].available) continue;
      const double qi = q_value(model.idle[s], m, exact.relative);
      const double qu = q_value(model.update[s], m, exact.relative);
      const double tol = tie_tolerance(qi);
      if (policy[s] && qi < qu - tol) {
        policy[s] = 0;
        changed = true;
      } else if (!policy[s] && qu < qi - tol) {
        policy[s] = 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  exact.update = greedy(model, m, exact.relative);
  exact.iterations = out.iterations;
  exact.residual = out.residual;
  return exact;
}

double arm_numeric_index(const ArmModel& model, int state, double hi, const RviOptions& options) {
  double lo = 0.0;
  auto at_lo = solve_arm(model, lo, options);
  if (!at_lo.update[static_cast<std::size_t>(state)]) return 0.0;
  auto at_hi = solve_arm(model, hi, options, &at_lo.relative);
  if (at_hi.update[static_cast<std::size_t>(state)])
    throw SolverError("bisection bracket failure: updating still optimal at m = " +
                      std::to_string(hi));
  std::vector<double> warm = at_hi.relative;
  while (hi - lo > std::max(1e-6, 1e-12 * hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    auto sol = solve_arm(model, mid, options, &warm);
    warm = sol.relative;
    if (sol.update[static_cast<std::size_t>(state)]) {
      lo = mid;
    } else {
      hi = mid;
      at_hi = std::move(sol);
    }
  }
  // Under the idle-side policy the action gap is affine in m; find its root
  // in extended precision.
  const double root = affine_gap_root(model, at_hi.update, state);
  // Near-ties are classified as idle, so the exact crossing may sit just
  // above the final bracket.
  const double slack = std::max(hi - lo, 1e-9 * std::max(1.0, hi));
  if (!std::isfinite(root) || !(root >= lo - slack && root <= hi + slack)) return 0.5 * (lo + hi);
  return std::max(0.0, root);
}

// ---------------------------------------------------------------------------

ArmModel random_walk_arm(const ErrorFunction& f, double p_e, std::int64_t d_max) {
  if (d_max < 1) throw InvalidArgument("random-walk arm needs d_max >= 1");
  if (!(p_e >= 0.0 && p_e < 1.0)) throw InvalidArgument("transmission error probability must be in [0, 1)");
  const auto n = static_cast<std::size_t>(d_max) + 1;
  ArmModel model;
  model.idle.resize(n);
  model.update.resize(n);
  model.reference = 0;
  model.idle[0] = ArmChoice{true, 0.0, 0.0, {{0, 0.5}, {1, 0.5}}};
  model.update[0].available = false;
  for (std::int64_t d = 1; d <= d_max; ++d) {
    const auto s = static_cast<std::size_t>(d);
    const double cost = f.weight() * f.eval(d);
    const int up = static_cast<int>(std::min(d + 1, d_max));
    const int down = static_cast<int>(d - 1);
    std::vector<Transition> walk =
        up == static_cast<int>(d) ? std::vector<Transition>{{up, 0.5}, {down, 0.5}}
                                  : std::vector<Transition>{{down, 0.5}, {up, 0.5}};
    model.idle[s] = ArmChoice{true, cost, 0.0, walk};
    std::vector<Transition> next{{0, 0.5 * (1.0 - p_e)}, {1, 0.5 * (1.0 - p_e)}};
    if (p_e > 0.0)
      for (const auto& t : walk) next.push_back({t.to, p_e * t.prob});
    model.update[s] = ArmChoice{true, p_e * cost, 1.0, std::move(next)};
  }
  return model;
}

SingleArmResult single_arm_rvi(const SingleArmProblem& problem, const RviOptions& options) {
  if (problem.m < 0.0) throw InvalidArgument("auxiliary cost m must be >= 0");
  const auto model = random_walk_arm(problem.f, problem.p_e, problem.d_max);
  auto sol = solve_arm(model, problem.m, options);
  SingleArmResult out;
  out.average_cost = sol.average_cost;
  out.relative = std::move(sol.relative);
  out.update = std::move(sol.update);
  out.iterations = sol.iterations;
  out.residual = sol.residual;
  out.threshold = problem.d_max + 1;
  for (std::int64_t d = 1; d <= problem.d_max; ++d)
    if (out.update[static_cast<std::size_t>(d)]) {
      out.threshold = d;
      break;
    }
  for (std::int64_t d = out.threshold; d <= problem.d_max; ++d)
    if (!out.update[static_cast<std::size_t>(d)])
      throw SolverError("optimal policy is not of threshold type: idle at d = " +
                        std::to_string(d) + " above update state " +
                        std::to_string(out.threshold));
  return out;
}

double numeric_whittle(std::int64_t d, const ErrorFunction& f, double p_e, std::int64_t d_max) {
  if (d < 1) throw InvalidArgument("numeric Whittle index needs d >= 1");
  if (d_max == 0) d_max = 2 * d + 10;
  if (d_max < d + 1) throw InvalidArgument("d_max must exceed d");
  const auto model = random_walk_arm(f, p_e, d_max);
  const double hi = 2.0 * whittle_random_walk(d, f) + 1.0;
  return arm_numeric_index(model, static_cast<int>(d), hi);
}

std::vector<std::int64_t> idle_set(const ErrorFunction& f, double p_e, double m,
                                   std::int64_t d_max) {
  const auto sol = solve_arm(random_walk_arm(f, p_e, d_max), m);
  std::vector<std::int64_t> out;
  for (std::int64_t d = 1; d <= d_max; ++d)
    if (!sol.update[static_cast<std::size_t>(d)]) out.push_back(d);
  return out;
}

IndexabilityResult indexability_check(const ErrorFunction& f, double p_e,
                                      std::span<const double> m_grid, std::int64_t d_max,
                                      bool require_cover) {
  if (m_grid.empty() || m_grid.front() != 0.0)
    throw InvalidArgument("m grid must start at 0");
  for (std::size_t i = 1; i < m_grid.size(); ++i)
    if (!(m_grid[i] > m_grid[i - 1])) throw InvalidArgument("m grid must be strictly increasing");

  const auto model = random_walk_arm(f, p_e, d_max);
  IndexabilityResult out;
  std::vector<char> prev_idle;
  std::vector<double> warm;
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    const double m = m_grid[i];
    auto sol = solve_arm(model, m, {}, warm.empty() ? nullptr : &warm);
    warm = sol.relative;
    std::vector<char> idle(static_cast<std::size_t>(d_max) + 1, 0);
    for (std::int64_t d = 1; d <= d_max; ++d) idle[d] = !sol.update[d];
    if (i == 0) {
      for (std::int64_t d = 1; d <= d_max; ++d)
        if (idle[d]) return {false, m, m, d, "idle set not empty at m = 0"};
    } else {
      for (std::int64_t d = 1; d <= d_max; ++d)
        if (prev_idle[d] && !idle[d]) return {false, m_grid[i - 1], m, d, "idle sets not nested"};
    }
    prev_idle = std::move(idle);
  }
  if (!require_cover) return out;
  for (std::int64_t d = 1; d <= d_max; ++d)
    if (!prev_idle[d])
      return {false, m_grid.back(), m_grid.back(), d, "idle set does not cover 1..d_max at the largest m"};
  return out;
}

// ---------------------------------------------------------------------------

ArmModel aoi_arm(const AoiCost& g, double p_e, std::int64_t h_max) {
  if (h_max < 2) throw InvalidArgument("AoI arm needs h_max >= 2");
  if (!(p_e >= 0.0 && p_e < 1.0)) throw InvalidArgument("transmission error probability must be in [0, 1)");
  const auto n = static_cast<std::size_t>(h_max);
  ArmModel model;
  model.idle.resize(n);
  model.update.resize(n);
  model.reference = 1;  // h = 2, the state right after a delivery
  model.damping = 0.5;  // threshold policies cycle deterministically
  const double g1 = g(1);
  for (std::int64_t h = 1; h <= h_max; ++h) {
    const auto s = static_cast<std::size_t>(h - 1);
    const int stay = static_cast<int>(std::min(h + 1, h_max) - 1);
    const double gh = g(h);
    model.idle[s] = ArmChoice{true, gh, 0.0, {{stay, 1.0}}};
    std::vector<Transition> next{{1, 1.0 - p_e}};
    if (p_e > 0.0) next.push_back({stay, p_e});
    model.update[s] = ArmChoice{true, (1.0 - p_e) * g1 + p_e * gh, 1.0, std::move(next)};
  }
  return model;
}

double aoi_numeric_index(std::int64_t h, const AoiCost& g, double p_e, std::int64_t h_max) {
  if (h < 1) throw InvalidArgument("AoI level must be >= 1");
  if (h_max == 0) h_max = 2 * h + 10;
  const auto model = aoi_arm(g, p_e, h_max);
  const double hi = 2.0 * nonlinear_aoi_index(h, g, 0.0) + 1.0;
  return arm_numeric_index(model, static_cast<int>(h - 1), hi);
}

}  // namespace s2::mdp
