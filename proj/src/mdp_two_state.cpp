#include <bit>

#include "s2/mdp.hpp"

namespace s2::mdp {

namespace {

void check_instance(std::span<const double> p, int horizon) {
  if (p.empty() || p.size() > 12) throw InvalidArgument("two-state backwards induction supports 1..12 nodes");
  if (horizon < 1 || horizon > 32) throw InvalidArgument("two-state backwards induction supports horizons 1..32");
  for (double pn : p)
    if (!(pn > 0.0 && pn <= 0.5)) throw InvalidArgument("flip probabilities must be in (0, 0.5]");
}

// Expected next-stage value for every "mode" mask y: bit n of y set means
// node n is wrong and not updated, so it stays wrong with probability 1-p_n;
// a clear bit means it becomes wrong with probability p_n.
std::vector<double> expectation(std::span<const double> p, std::vector<double> u) {
  const std::size_t n = p.size();
  for (std::size_t bit = 0; bit < n; ++bit) {
    const std::size_t stride = std::size_t{1} << bit;
    const double pn = p[bit];
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (i & stride) continue;
      const double a = u[i];
      const double b = u[i | stride];
      u[i] = (1.0 - pn) * a + pn * b;
      u[i | stride] = pn * a + (1.0 - pn) * b;
    }
  }
  return u;
}

std::vector<double> stage_input(const std::vector<double>& next_value) {
  std::vector<double> u(next_value.size());
  for (std::size_t x = 0; x < u.size(); ++x)
    u[x] = static_cast<double>(std::popcount(x)) + next_value[x];
  return u;
}

std::uint32_t after(std::uint32_t mask, int action) {
  return action == kIdle ? mask : mask & ~(std::uint32_t{1} << action);
}

}  // namespace

TwoStatePlan two_state_backwards_induction(std::span<const double> p, int horizon) {
  check_instance(p, horizon);
  const std::size_t states = std::size_t{1} << p.size();
  TwoStatePlan plan;
  plan.nodes = p.size();
  plan.horizon = horizon;
  plan.value.assign(static_cast<std::size_t>(horizon) + 1, std::vector<double>(states, 0.0));
  plan.action.assign(static_cast<std::size_t>(horizon), std::vector<int>(states, kIdle));

  for (int t = horizon - 1; t >= 0; --t) {
    const auto g = expectation(p, stage_input(plan.value[t + 1]));
    for (std::uint32_t x = 0; x < states; ++x) {
      double best = g[x];
      int best_action = kIdle;
      for (int n = 0; n < static_cast<int>(p.size()); ++n) {
        if (!(x >> n & 1U)) continue;
        const double v = g[after(x, n)];
        if (v < best) {
          best = v;
          best_action = n;
        }
      }
      plan.value[t][x] = best;
      plan.action[t][x] = best_action;
    }
  }
  return plan;
}

int theorem1_policy(std::uint32_t mask, std::span<const double> p) {
  int best = kIdle;
  for (int n = 0; n < static_cast<int>(p.size()); ++n) {
    if (!(mask >> n & 1U)) continue;
    if (best == kIdle || p[n] < p[best]) best = n;
  }
  return best;
}

std::vector<double> two_state_policy_value(std::span<const double> p, int horizon,
                                           const TwoStateRule& rule) {
  check_instance(p, horizon);
  const std::size_t states = std::size_t{1} << p.size();
  std::vector<double> value(states, 0.0);
  for (int t = horizon - 1; t >= 0; --t) {
    const auto g = expectation(p, stage_input(value));
    for (std::uint32_t x = 0; x < states; ++x) {
      const int a = rule(t, x);
      if (a != kIdle && (a < 0 || a >= static_cast<int>(p.size())))
        throw InvalidArgument("rule returned an invalid node id");
      value[x] = g[after(x, a)];
    }
  }
  return value;
}

}  // namespace s2::mdp
