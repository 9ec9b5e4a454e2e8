#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace s2 {

/// Raised for any input that violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Status = std::int64_t;

/// Adds with saturation at the int64 limits; long walks never wrap.
Status saturating_add(Status a, Status b);

/// |a - b| computed in 128 bits and clamped to INT64_MAX.
std::int64_t abs_difference(Status a, Status b);

// ---------------------------------------------------------------------------
// Sources

/// Symmetric two-state Markov source on {0, 1}.
struct TwoStateSource {
  double p = 0.5;  // flip probability per slot, in (0, 0.5]

  static TwoStateSource make(double p);
};

/// Integer random walk with increments +1, -1, 0.
struct RandomWalkSource {
  double q_up = 0.5;
  double q_down = 0.5;
  double q_stay = 0.0;

  static RandomWalkSource make(double q_up, double q_down, double q_stay);
  static RandomWalkSource symmetric() { return {}; }

  /// Mean increment per slot, q_up - q_down.
  double drift() const { return q_up - q_down; }
};

using SourceModel = std::variant<TwoStateSource, RandomWalkSource>;

Status step_two_state(Status state, double p, double rand);
Status step_random_walk(Status state, double q_up, double q_down, double q_stay,
                        double rand);
Status step_source(const SourceModel& model, Status state, double rand);

// ---------------------------------------------------------------------------
// Error functions

enum class ErrorKind { linear, quadratic, exponential, indicator, threshold, tabulated };

/// How a tabulated error function continues past its last entry.
enum class Extension { none, hold, linear };

/// Non-decreasing cost delta(d) of the absolute status difference, with a
/// node weight. The weight is not applied by eval(); index code applies it.
class ErrorFunction {
 public:
  static ErrorFunction linear(double weight = 1.0);
  static ErrorFunction quadratic(double weight = 1.0);
  static ErrorFunction exponential(double weight = 1.0);
  static ErrorFunction indicator(double weight = 1.0);
  static ErrorFunction threshold(std::int64_t d0, double weight = 1.0);
  static ErrorFunction tabulated(std::vector<double> values, Extension ext,
                                 double weight = 1.0);

  double eval(std::int64_t d) const;

  ErrorKind kind() const { return kind_; }
  double weight() const { return weight_; }
  std::int64_t threshold_d0() const { return d0_; }
  const std::vector<double>& table() const { return table_; }
  Extension extension() const { return ext_; }

  ErrorFunction with_weight(double w) const;

  std::string name() const;

 private:
  ErrorKind kind_ = ErrorKind::linear;
  double weight_ = 1.0;
  std::int64_t d0_ = 1;
  std::vector<double> table_;
  Extension ext_ = Extension::none;
};

inline double eval_error(const ErrorFunction& f, std::int64_t d) { return f.eval(d); }

struct ErrorFunctionCheck {
  bool ok = true;
  std::int64_t at = -1;  // first violating d
  std::string reason;
};

/// Checks delta(0) = 0, monotonicity on [0, d_max], and that some
/// delta(d) > 0 on that range.
ErrorFunctionCheck validate_error_function(const ErrorFunction& f, std::int64_t d_max);

// ---------------------------------------------------------------------------
// Node state

/// Per-node runtime state. `d` is kept equal to |s - s_hat| by refresh().
struct NodeState {
  Status s = 0;
  Status s_hat = 0;
  std::int64_t d = 0;
  std::int64_t h = 0;  // AoI in slots
  std::int64_t a = 0;  // age of the buffered packet
  bool has_packet = false;
  double p_e = 0.0;

  void refresh() { d = abs_difference(s, s_hat); }
  std::int64_t b() const { return h - a; }
};

}  // namespace s2
