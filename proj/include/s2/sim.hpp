#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "s2/domain.hpp"
#include "s2/meanfield.hpp"
#include "s2/policies.hpp"
#include "s2/rng.hpp"

namespace s2::sim {

/// slotted: one Bernoulli contention round per data slot.
/// mini_slot: idle contention mini-slots cost 1/slot_ratio of a data slot.
/// Centralized policies ignore this and schedule one node per data slot.
enum class ContentionModel { slotted, mini_slot };

/// synced: s = s_hat = 0 at t = 0. offset: s = initial_offset, s_hat = 0.
enum class InitialRule { synced, offset };

struct SimConfig {
  std::vector<NodeParams> nodes;
  std::int64_t horizon = 100'000;  // slots, i.e. source steps
  PolicySpec policy;
  ContentionModel contention = ContentionModel::mini_slot;
  double slot_ratio = 10.0;        // t_slot / t_c
  std::uint64_t seed = 1;
  InitialRule initial = InitialRule::synced;
  std::int64_t initial_offset = 0;
  std::int64_t warmup = 0;         // leading slots left out of the averages
  bool drift_predictor = false;    // tracker extrapolates s_hat by the walk drift
  std::int64_t d_cap = 0;          // > 0: walk steps that would push d past it are suppressed
  std::int64_t track_threshold = 0;  // > 0: report the fraction of nodes with d >= it
  std::optional<meanfield::Mapping> etsu_mapping;  // overrides the mean-field plan

  void validate() const;
};

struct SimReport {
  double avg_weighted_error = 0.0;  // (1/T) sum_t (1/N) sum_n w_n delta_n(d_n(t))
  double avg_aoi = 0.0;
  std::vector<double> node_error;   // per-node time average of w_n delta_n(d_n)
  std::vector<double> node_aoi;
  double fraction_above = 0.0;      // time-average fraction with d >= track_threshold

  // One entry per data slot (centralized, slotted) or frame (mini_slot).
  std::int64_t successes = 0;
  std::int64_t channel_failures = 0;
  std::int64_t collisions = 0;
  std::int64_t idles = 0;
  std::int64_t idle_minislots = 0;

  std::int64_t slots = 0;           // source steps taken
  std::int64_t measured = 0;        // slots entering the averages
  double elapsed = 0.0;             // virtual time in t_slot units
  std::optional<meanfield::MeanFieldSolution> plan;  // etsu only
};

SimReport run(const SimConfig& config);

struct Contender {
  int node = 0;
  double probability = 0.0;
};

struct FrameHooks {
  /// Current contenders; called before every contention round.
  std::function<void(std::vector<Contender>&)> contenders;
  /// Advances virtual time; returns false once the horizon is reached.
  std::function<bool(double)> advance;
  /// Called for a successful delivery, before the data slot elapses.
  std::function<void(int)> deliver;
};

enum class FrameOutcome { success, channel_failure, collision, idle, truncated };

struct FrameResult {
  FrameOutcome outcome = FrameOutcome::idle;
  int winner = -1;             // sole transmitter, -1 if none
  double elapsed = 0.0;
  std::int64_t idle_minislots = 0;
};

/// One contention frame: rounds of independent attempts until someone
/// transmits. An idle round costs 1/slot_ratio; a round with a transmitter
/// costs 1 and ends the frame. No contenders: one idle data slot.
/// `round` and `attempt` index the contention and channel draws.
FrameResult run_contention_frame(const FrameHooks& hooks, std::span<const double> p_e,
                                 double slot_ratio, const CounterRng& rng,
                                 std::uint64_t& round, std::uint64_t& attempt);

}  // namespace s2::sim
