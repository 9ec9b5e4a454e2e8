#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "s2/domain.hpp"

namespace s2 {

/// Whittle index of a random-walk arm at status difference d:
///   w * sum_{i=1..d} (2i - d) * delta(i),
/// summed in order i = 1..d. Zero at d = 0.
double whittle_random_walk(std::int64_t d, const ErrorFunction& f);

/// Unreliable-channel index: the reliable index scaled by (1 - p_e).
/// This is the small-p_e approximation; see mdp::numeric_whittle for the
/// exact value at a given p_e.
double whittle_random_walk_unreliable(std::int64_t d, const ErrorFunction& f, double p_e);

/// Incremental table of the random-walk index for one error function.
/// Uses I(d) = I(d-1) + w * (d * delta(d) - sum_{i<d} delta(i)), so each
/// lookup is O(1) amortized. Not thread-safe; keep one per caller.
class WhittleTable {
 public:
  explicit WhittleTable(ErrorFunction f);

  double operator()(std::int64_t d);
  double unreliable(std::int64_t d, double p_e);

  /// Smallest d with (1 - p_e) * I(d) >= target; searches up to d_limit.
  /// Returns d_limit + 1 when no such d exists in range.
  std::int64_t first_at_least(double target, double p_e, std::int64_t d_limit);

  const ErrorFunction& function() const { return f_; }

 private:
  void grow_to(std::int64_t d);

  ErrorFunction f_;
  std::vector<double> index_;      // I(d), unweighted
  std::vector<double> prefix_;     // sum_{i<=d} delta(i)
};

/// AoI Whittle index of the separate sample-at-change approach for a node
/// whose buffered packet has age a, with b = h - a and arrival probability p.
double aoi_separate_index(std::int64_t a, std::int64_t b, double p);

/// Generate-at-will AoI index w * (1 - p_e) * h^2.
double aoi_error_index(std::int64_t h, double p_e, double w);

using AoiCost = std::function<double(std::int64_t)>;

/// sum_{h=1..H} (g(H) - g(h)) * (1 - p_e) for an integer AoI level H >= 1.
double nonlinear_aoi_index(std::int64_t H, const AoiCost& g, double p_e);

/// Threshold AoI level round((1 - nu) N / (1 - p_e)), at least 1.
std::int64_t nonlinear_aoi_level(double nu, std::int64_t n, double p_e);

/// Index threshold for an arbitrary non-decreasing AoI cost g when the top
/// nu-fraction of n generate-at-will nodes may contend.
double nonlinear_aoi_threshold(const AoiCost& g, double nu, std::int64_t n, double p_e);

}  // namespace s2
