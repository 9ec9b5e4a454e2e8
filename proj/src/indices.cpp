#include "s2/indices.hpp"

#include <cmath>

namespace s2 {

namespace {

void check_pe(double p_e) {
  if (!(p_e >= 0.0 && p_e < 1.0)) throw InvalidArgument("transmission error probability must be in [0, 1)");
}

}  // namespace

double whittle_random_walk(std::int64_t d, const ErrorFunction& f) {
  if (d < 0) throw InvalidArgument("status difference must be nonnegative");
  double sum = 0.0;
  for (std::int64_t i = 1; i <= d; ++i)
    sum += static_cast<double>(2 * i - d) * f.eval(i);
  return f.weight() * sum;
}

double whittle_random_walk_unreliable(std::int64_t d, const ErrorFunction& f, double p_e) {
  check_pe(p_e);
  return whittle_random_walk(d, f) * (1.0 - p_e);
}

WhittleTable::WhittleTable(ErrorFunction f) : f_(std::move(f)), index_{0.0}, prefix_{0.0} {}

void WhittleTable::grow_to(std::int64_t d) {
  for (auto k = static_cast<std::int64_t>(index_.size()); k <= d; ++k) {
    const double delta = f_.eval(k);
    const double prev_prefix = prefix_.back();
    index_.push_back(index_.back() + static_cast<double>(k) * delta - prev_prefix);
    prefix_.push_back(prev_prefix + delta);
  }
}

double WhittleTable::operator()(std::int64_t d) {
  if (d < 0) throw InvalidArgument("status difference must be nonnegative");
  grow_to(d);
  return f_.weight() * index_[static_cast<std::size_t>(d)];
}

double WhittleTable::unreliable(std::int64_t d, double p_e) {
  check_pe(p_e);
  return (*this)(d) * (1.0 - p_e);
}

std::int64_t WhittleTable::first_at_least(double target, double p_e, std::int64_t d_limit) {
  for (std::int64_t d = 0; d <= d_limit; ++d)
    if (unreliable(d, p_e) >= target) return d;
  return d_limit + 1;
}

double aoi_separate_index(std::int64_t a, std::int64_t b, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("arrival probability must be in (0, 1]");
  if (a < 0 || b < 0) throw InvalidArgument("packet age and b = h - a must be nonnegative");
  const auto af = static_cast<double>(a);
  const auto bf = static_cast<double>(b);
  if (bf > 0.5 * p * (af * af - af) + af) {
    const double x = (bf + 0.5 * af * (af - 1.0) * p) / (1.0 - p + af * p);
    return 0.5 * x * x + (1.0 / p - 0.5) * x;
  }
  return bf / p;
}

double aoi_error_index(std::int64_t h, double p_e, double w) {
  if (h < 0) throw InvalidArgument("AoI must be nonnegative");
  const auto hf = static_cast<double>(h);
  return w * (1.0 - p_e) * hf * hf;
}

double nonlinear_aoi_index(std::int64_t H, const AoiCost& g, double p_e) {
  check_pe(p_e);
  if (H < 1) throw InvalidArgument("AoI level must be >= 1");
  const double top = g(H);
  double sum = 0.0;
  for (std::int64_t h = 1; h <= H; ++h) sum += top - g(h);
  return sum * (1.0 - p_e);
}

std::int64_t nonlinear_aoi_level(double nu, std::int64_t n, double p_e) {
  check_pe(p_e);
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("nu must be in (0, 1]");
  if (n < 1) throw InvalidArgument("node count must be >= 1");
  const double raw = (1.0 - nu) * static_cast<double>(n) / (1.0 - p_e);
  return std::max<std::int64_t>(1, std::llround(raw));
}

double nonlinear_aoi_threshold(const AoiCost& g, double nu, std::int64_t n, double p_e) {
  return nonlinear_aoi_index(nonlinear_aoi_level(nu, n, p_e), g, p_e);
}

}  // namespace s2
