#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2/domain.hpp"
#include "s2/indices.hpp"

namespace s2::mdp {

/// Raised when an iterative solver misses its tolerance or an assumption it
/// checks (threshold structure, bisection bracket) does not hold.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kIdle = -1;

// ---------------------------------------------------------------------------
// Two-state network, finite horizon

/// Exact finite-horizon solution over the reduced state: bit n of a mask is
/// 1 when node n's tracked status is wrong. A decision is taken at t = 0..T-1
/// and the cost of a stage is the number of wrong nodes after the transition.
struct TwoStatePlan {
  std::size_t nodes = 0;
  int horizon = 0;
  std::vector<std::vector<double>> value;  // value[t][mask], t = 0..T
  std::vector<std::vector<int>> action;    // action[t][mask], kIdle or node id

  double value_at(std::uint32_t mask) const { return value.front().at(mask); }
};

TwoStatePlan two_state_backwards_induction(std::span<const double> p, int horizon);

/// Node with the smallest flip probability among the wrong ones; lowest id on
/// ties, kIdle if every node is correct.
int theorem1_policy(std::uint32_t mask, std::span<const double> p);

using TwoStateRule = std::function<int(int t, std::uint32_t mask)>;

/// Exact expected total cost of an arbitrary rule, same cost convention as
/// two_state_backwards_induction. Returns one value per initial mask.
std::vector<double> two_state_policy_value(std::span<const double> p, int horizon,
                                           const TwoStateRule& rule);

// ---------------------------------------------------------------------------
// Generic single-arm average-cost MDP with actions {idle, update}

struct Transition {
  int to = 0;
  double prob = 0.0;
};

struct ArmChoice {
  bool available = true;
  double cost = 0.0;    // constant part of the stage cost
  double m_coef = 0.0;  // stage cost is cost + m_coef * m
  std::vector<Transition> next;
};

struct ArmModel {
  std::vector<ArmChoice> idle;
  std::vector<ArmChoice> update;
  int reference = 0;     // state whose relative value is pinned to 0
  double damping = 1.0;  // relaxation weight in (0, 1]; < 1 handles periodic chains

  std::size_t size() const { return idle.size(); }
};

struct RviOptions {
  double tolerance = 1e-10;  // span tolerance, relative to max(1, |f|_inf)
  long max_iterations = 1'000'000;
  bool polish = true;        // finish with exact policy iteration
};

struct ArmSolution {
  double average_cost = 0.0;
  std::vector<double> relative;   // relative cost function, f(reference) = 0
  std::vector<char> update;       // optimal action per state, idle on ties
  long iterations = 0;
  double residual = 0.0;
};

ArmSolution solve_arm(const ArmModel& model, double m, const RviOptions& options = {},
                      const std::vector<double>* warm_start = nullptr);

/// Exact average cost and relative values of a fixed policy (dense solve).
ArmSolution evaluate_arm_policy(const ArmModel& model, double m, const std::vector<char>& update);

/// Q(update) - Q(idle) at `state` under the given relative values.
double arm_action_gap(const ArmModel& model, double m, const std::vector<double>& relative,
                      int state);

/// Infimum m at which idling at `state` is optimal. Bisection on [0, hi]
/// down to max(1e-6, 1e-12 * hi), then the crossing is located exactly under
/// the idle-side policy, where the action gap is affine in m.
double arm_numeric_index(const ArmModel& model, int state, double hi,
                         const RviOptions& options = {});

// ---------------------------------------------------------------------------
// Random-walk arm

/// Decomposed problem for one random-walk node: states 0..d_max with a
/// reflecting upper boundary, auxiliary update cost m, error probability p_e.
/// State 0 moves to 1 with probability 1/2 and otherwise stays.
struct SingleArmProblem {
  ErrorFunction f = ErrorFunction::linear();
  double m = 0.0;
  double p_e = 0.0;
  std::int64_t d_max = 64;
};

struct SingleArmResult {
  double average_cost = 0.0;
  std::vector<double> relative;
  std::vector<char> update;
  std::int64_t threshold = 0;  // smallest d >= 1 where updating is optimal; d_max + 1 if none
  long iterations = 0;
  double residual = 0.0;
};

ArmModel random_walk_arm(const ErrorFunction& f, double p_e, std::int64_t d_max);

/// Relative value iteration on the random-walk arm. Throws SolverError if
/// the optimal policy is not of threshold type.
SingleArmResult single_arm_rvi(const SingleArmProblem& problem, const RviOptions& options = {});

/// Whittle index from the Bellman equation by bisection on m. The bracket is
/// [0, 2 * closed-form index + 1]. d_max = 0 selects 2d + 10.
double numeric_whittle(std::int64_t d, const ErrorFunction& f, double p_e,
                       std::int64_t d_max = 0);

struct IndexabilityResult {
  bool certified = true;
  double m_low = 0.0;
  double m_high = 0.0;
  std::int64_t d = -1;
  std::string reason;
};

/// Certifies that the idle set is empty at m = 0 and nested along the grid.
/// With require_cover it must also hold every state 1..d_max at the largest m.
IndexabilityResult indexability_check(const ErrorFunction& f, double p_e,
                                      std::span<const double> m_grid, std::int64_t d_max,
                                      bool require_cover = false);

/// Idle-optimal states of the random-walk arm at cost m.
std::vector<std::int64_t> idle_set(const ErrorFunction& f, double p_e, double m,
                                   std::int64_t d_max);

// ---------------------------------------------------------------------------
// Generate-at-will AoI arm (brute-force check of the non-linear AoI index)

/// State h is the AoI the node reaches at the next slot boundary if it does
/// not deliver. Each slot costs g(AoI at that boundary); a successful update
/// brings it to 1. States 1..h_max, reflecting at h_max.
ArmModel aoi_arm(const AoiCost& g, double p_e, std::int64_t h_max);

double aoi_numeric_index(std::int64_t h, const AoiCost& g, double p_e, std::int64_t h_max = 0);

// ---------------------------------------------------------------------------
// Small multi-node network (exact optimum under one update per slot)

struct NodeSpec {
  ErrorFunction f = ErrorFunction::linear();
  double p_e = 0.0;
  RandomWalkSource walk = RandomWalkSource::symmetric();
};

struct MultiNodeSolution {
  double average_cost = 0.0;            // (1/N) sum_n w_n delta_n(d_n), time average
  std::vector<double> relative;
  std::vector<int> policy;              // kIdle or node id, per joint state
  std::vector<std::int64_t> dims;       // d_max + 1 per node
  long iterations = 0;
  double residual = 0.0;

  std::size_t encode(std::span<const std::int64_t> d) const;
  std::vector<std::int64_t> decode(std::size_t state) const;
};

using MultiNodeRule = std::function<int(std::span<const std::int64_t> d)>;

/// Joint chain of up to three symmetric random-walk nodes with the same slot
/// dynamics as the simulator: a successful update at slot t leaves
/// d(t+1) = |increment|, otherwise d moves by the walk; reflecting at d_max.
MultiNodeSolution multi_node_optimal(std::span<const NodeSpec> nodes, std::int64_t d_max,
                                     const RviOptions& options = {});

/// Average cost of a fixed rule on the same truncated chain.
double multi_node_policy_cost(std::span<const NodeSpec> nodes, std::int64_t d_max,
                              const MultiNodeRule& rule, const RviOptions& options = {});

}  // namespace s2::mdp
