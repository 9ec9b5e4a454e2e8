#include "s2/domain.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace s2 {

namespace {

constexpr Status kMax = std::numeric_limits<Status>::max();
constexpr Status kMin = std::numeric_limits<Status>::min();

bool is_probability(double x) { return x >= 0.0 && x <= 1.0 && std::isfinite(x); }

}  // namespace

Status saturating_add(Status a, Status b) {
  Status out;
  if (__builtin_add_overflow(a, b, &out)) return b > 0 ? kMax : kMin;
  return out;
}

std::int64_t abs_difference(Status a, Status b) {
  __int128 diff = static_cast<__int128>(a) - static_cast<__int128>(b);
  if (diff < 0) diff = -diff;
  if (diff > static_cast<__int128>(kMax)) return kMax;
  return static_cast<std::int64_t>(diff);
}

TwoStateSource TwoStateSource::make(double p) {
  if (!(p > 0.0 && p <= 0.5)) throw InvalidArgument("two-state flip probability must be in (0, 0.5]");
  return TwoStateSource{p};
}

RandomWalkSource RandomWalkSource::make(double q_up, double q_down, double q_stay) {
  if (!is_probability(q_up) || !is_probability(q_down) || !is_probability(q_stay))
    throw InvalidArgument("random-walk probabilities must lie in [0, 1]");
  if (std::abs(q_up + q_down + q_stay - 1.0) > 1e-12)
    throw InvalidArgument("random-walk probabilities must sum to 1");
  return RandomWalkSource{q_up, q_down, q_stay};
}

Status step_two_state(Status state, double p, double rand) {
  if (!(p > 0.0 && p <= 0.5)) throw InvalidArgument("two-state flip probability must be in (0, 0.5]");
  if (state != 0 && state != 1) throw InvalidArgument("two-state status must be 0 or 1");
  return rand < p ? 1 - state : state;
}

Status step_random_walk(Status state, double q_up, double q_down, double q_stay,
                        double rand) {
  if (!is_probability(q_up) || !is_probability(q_down) || !is_probability(q_stay) ||
      std::abs(q_up + q_down + q_stay - 1.0) > 1e-12)
    throw InvalidArgument("random-walk probabilities must sum to 1");
  if (rand < q_up) return saturating_add(state, 1);
  if (rand < q_up + q_down) return saturating_add(state, -1);
  return state;
}

Status step_source(const SourceModel& model, Status state, double rand) {
  if (const auto* two = std::get_if<TwoStateSource>(&model))
    return step_two_state(state, two->p, rand);
  const auto& rw = std::get<RandomWalkSource>(model);
  return step_random_walk(state, rw.q_up, rw.q_down, rw.q_stay, rand);
}

// ---------------------------------------------------------------------------

ErrorFunction ErrorFunction::linear(double weight) {
  ErrorFunction f;
  f.kind_ = ErrorKind::linear;
  return f.with_weight(weight);
}

ErrorFunction ErrorFunction::quadratic(double weight) {
  ErrorFunction f;
  f.kind_ = ErrorKind::quadratic;
  return f.with_weight(weight);
}

ErrorFunction ErrorFunction::exponential(double weight) {
  ErrorFunction f;
  f.kind_ = ErrorKind::exponential;
  return f.with_weight(weight);
}

ErrorFunction ErrorFunction::indicator(double weight) {
  ErrorFunction f;
  f.kind_ = ErrorKind::indicator;
  return f.with_weight(weight);
}

ErrorFunction ErrorFunction::threshold(std::int64_t d0, double weight) {
  if (d0 < 1) throw InvalidArgument("threshold error function needs D0 >= 1");
  ErrorFunction f;
  f.kind_ = ErrorKind::threshold;
  f.d0_ = d0;
  return f.with_weight(weight);
}

ErrorFunction ErrorFunction::tabulated(std::vector<double> values, Extension ext,
                                       double weight) {
  if (values.empty()) throw InvalidArgument("tabulated error function needs at least one value");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("tabulated error values must be finite");
  ErrorFunction f;
  f.kind_ = ErrorKind::tabulated;
  f.table_ = std::move(values);
  f.ext_ = ext;
  return f.with_weight(weight);
}

ErrorFunction ErrorFunction::with_weight(double w) const {
  if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("error weight must be finite and >= 0");
  ErrorFunction f = *this;
  f.weight_ = w;
  return f;
}

double ErrorFunction::eval(std::int64_t d) const {
  if (d < 0) throw InvalidArgument("status difference must be nonnegative");
  const auto x = static_cast<double>(d);
  switch (kind_) {
    case ErrorKind::linear:
      return x;
    case ErrorKind::quadratic:
      return x * x;
    case ErrorKind::exponential:
      return std::expm1(x);
    case ErrorKind::indicator:
      return d >= 1 ? 1.0 : 0.0;
    case ErrorKind::threshold:
      return d >= d0_ ? 1.0 : 0.0;
    case ErrorKind::tabulated: {
      const auto n = static_cast<std::int64_t>(table_.size());
      if (d < n) return table_[static_cast<std::size_t>(d)];
      switch (ext_) {
        case Extension::none:
          throw InvalidArgument("tabulated error function queried beyond its prefix");
        case Extension::hold:
          return table_.back();
        case Extension::linear: {
          const double slope = n >= 2 ? table_[n - 1] - table_[n - 2] : 0.0;
          return table_.back() + slope * static_cast<double>(d - (n - 1));
        }
      }
    }
  }
  return 0.0;
}

std::string ErrorFunction::name() const {
  switch (kind_) {
    case ErrorKind::linear: return "linear";
    case ErrorKind::quadratic: return "quadratic";
    case ErrorKind::exponential: return "exponential";
    case ErrorKind::indicator: return "indicator";
    case ErrorKind::threshold: return "threshold:" + std::to_string(d0_);
    case ErrorKind::tabulated: {
      std::ostringstream os;
      os << "tabulated[" << table_.size() << "]";
      return os.str();
    }
  }
  return "unknown";
}

ErrorFunctionCheck validate_error_function(const ErrorFunction& f, std::int64_t d_max) {
  if (d_max < 1) throw InvalidArgument("validation range needs d_max >= 1");
  ErrorFunctionCheck out;
  double prev = f.eval(0);
  if (prev != 0.0) return {false, 0, "delta(0) must be 0"};
  bool positive = false;
  for (std::int64_t d = 1; d <= d_max; ++d) {
    const double v = f.eval(d);
    if (v < prev) return {false, d, "not non-decreasing"};
    positive = positive || v > 0.0;
    prev = v;
  }
  if (!positive) return {false, d_max, "all-zero on the checked range"};
  return out;
}

}  // namespace s2
