#include <doctest.h>

#include <cmath>

#include "s2/domain.hpp"
#include "s2/rng.hpp"

using namespace s2;

TEST_CASE("two-state step") {
  CHECK(step_two_state(0, 0.3, 0.1) == 1);
  CHECK(step_two_state(1, 0.3, 0.9) == 1);
  CHECK(step_two_state(0, 0.5, 0.5) == 0);
  CHECK_THROWS_AS(TwoStateSource::make(0.6), InvalidArgument);
  CHECK_THROWS_AS(TwoStateSource::make(0.0), InvalidArgument);
}

TEST_CASE("random walk step") {
  CHECK(step_random_walk(5, 0.5, 0.5, 0.0, 0.2) == 6);
  CHECK(step_random_walk(5, 0.5, 0.5, 0.0, 0.7) == 4);
  CHECK(step_random_walk(0, 0.3, 0.3, 0.4, 0.99) == 0);
  CHECK_THROWS_AS(RandomWalkSource::make(0.5, 0.5, 0.5), InvalidArgument);
}

TEST_CASE("step_source dispatches on the model") {
  CHECK(step_source(TwoStateSource::make(0.3), 0, 0.1) == 1);
  CHECK(step_source(RandomWalkSource::symmetric(), 5, 0.7) == 4);
}

TEST_CASE("status arithmetic saturates instead of overflowing") {
  const Status big = std::numeric_limits<Status>::max();
  CHECK(saturating_add(big, 1) == big);
  CHECK(saturating_add(-big - 1, -1) == -big - 1);
  CHECK(abs_difference(-3, 4) == 7);
  CHECK(abs_difference(-big - 1, big) == std::numeric_limits<std::int64_t>::max());
}

TEST_CASE("error function kinds") {
  CHECK(eval_error(ErrorFunction::linear(), 0) == 0.0);
  CHECK(eval_error(ErrorFunction::exponential(), 2) == doctest::Approx(std::exp(2.0) - 1.0));
  CHECK(eval_error(ErrorFunction::exponential(), 2) == doctest::Approx(6.389).epsilon(1e-3));
  CHECK(eval_error(ErrorFunction::indicator(), 7) == 1.0);
  CHECK(eval_error(ErrorFunction::indicator(), 0) == 0.0);
  CHECK(eval_error(ErrorFunction::quadratic(), 3) == 9.0);
  CHECK(eval_error(ErrorFunction::threshold(3), 2) == 0.0);
  CHECK(eval_error(ErrorFunction::threshold(3), 3) == 1.0);
  // weight is applied by the caller, not by eval
  const auto f = ErrorFunction::linear(2.5);
  CHECK(f.eval(4) == 4.0);
  CHECK(f.weight() == 2.5);
}

TEST_CASE("tabulated extensions") {
  const std::vector<double> v{0, 1, 3};
  CHECK(ErrorFunction::tabulated(v, Extension::hold).eval(10) == 3.0);
  CHECK(ErrorFunction::tabulated(v, Extension::linear).eval(5) == 9.0);
  CHECK_THROWS_AS(ErrorFunction::tabulated(v, Extension::none).eval(3), InvalidArgument);
}

TEST_CASE("validate_error_function") {
  CHECK(validate_error_function(ErrorFunction::linear(), 100).ok);
  const auto dip = validate_error_function(ErrorFunction::tabulated({0, 2, 1}, Extension::hold), 2);
  CHECK_FALSE(dip.ok);
  CHECK(dip.at == 2);
  const auto flat = validate_error_function(ErrorFunction::tabulated({0, 0, 0}, Extension::hold), 2);
  CHECK_FALSE(flat.ok);
  CHECK_FALSE(validate_error_function(ErrorFunction::tabulated({1, 2}, Extension::hold), 1).ok);
}

TEST_CASE("counter rng is a pure function of its coordinates") {
  const CounterRng a(7), b(7), c(8);
  CHECK(a.bits(Stream::source, 3, 99) == b.bits(Stream::source, 3, 99));
  CHECK(a.bits(Stream::source, 3, 99) != c.bits(Stream::source, 3, 99));
  CHECK(a.bits(Stream::source, 3, 99) != a.bits(Stream::channel, 3, 99));
  CHECK(a.bits(Stream::source, 3, 99) != a.bits(Stream::source, 4, 99));
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform(Stream::policy, 0, static_cast<std::uint64_t>(i));
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}
