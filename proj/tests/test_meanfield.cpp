#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "s2/indices.hpp"
#include "s2/meanfield.hpp"

using namespace s2;
using namespace s2::meanfield;

namespace {

// Dense transition matrix of the truncated chain, written from the model
// description: below the threshold a lazy birth-death walk; at or above it
// a reset to 0 with probability eps, otherwise the same walk. The top state
// keeps the mass that would move up.
Eigen::MatrixXd dense_chain(double lambda, double mu, double eps, std::int64_t d_th, std::int64_t k) {
  const auto n = static_cast<Eigen::Index>(d_th + k);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index d = 0; d < n; ++d) {
    const double keep = d >= d_th ? 1.0 - eps : 1.0;
    if (d >= d_th) P(d, 0) += eps;
    const Eigen::Index up = std::min(d + 1, n - 1);
    P(d, up) += keep * lambda;
    if (d == 0) {
      P(d, d) += keep * (1.0 - lambda);
    } else {
      P(d, d - 1) += keep * mu;
      P(d, d) += keep * (1.0 - lambda - mu);
    }
  }
  return P;
}

Eigen::VectorXd dense_stationary(const Eigen::MatrixXd& P) {
  const auto n = P.rows();
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  return A.fullPivLu().solve(b);
}

}  // namespace

TEST_CASE("stationary law matches a dense linear solve") {
  struct Case {
    double lambda, mu, eps;
    std::int64_t d_th;
  };
  for (const Case c : {Case{0.5, 0.5, 1.0, 1}, Case{0.5, 0.5, 0.2, 4}, Case{0.3, 0.4, 0.05, 6},
                       Case{0.4, 0.2, 0.3, 3}, Case{0.25, 0.25, 0.5, 1}}) {
    const std::int64_t k = 120;
    const auto st = stationary_distribution({c.lambda, c.mu, c.eps, c.d_th, k});
    const auto ref = dense_stationary(dense_chain(c.lambda, c.mu, c.eps, c.d_th, k));
    REQUIRE(st.pi.size() == static_cast<std::size_t>(ref.size()));
    double sum = 0.0, above = 0.0;
    for (std::size_t i = 0; i < st.pi.size(); ++i) {
      CHECK(st.pi[i] == doctest::Approx(ref(static_cast<Eigen::Index>(i))).epsilon(1e-9));
      sum += st.pi[i];
      if (static_cast<std::int64_t>(i) >= c.d_th) above += st.pi[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.sigma == doctest::Approx(above).epsilon(1e-10));
  }
}

TEST_CASE("eps = 1 with lambda + mu = 1: state 0 balances the one-step return") {
  // Every slot the node at d >= 1 resets; state 0 leaves with lambda.
  // pi_0 lambda = pi_1 (reset) -> pi_0 = 1 / (1 + lambda).
  for (double lambda : {0.5, 0.3}) {
    const auto st = stationary_distribution({lambda, 1.0 - lambda, 1.0, 1, 64});
    CHECK(st.pi[0] == doctest::Approx(1.0 / (1.0 + lambda)).epsilon(1e-12));
  }
}

TEST_CASE("geometric recursion below the threshold") {
  const double lambda = 0.3, mu = 0.45, eps = 0.1;
  const std::int64_t d_th = 7;
  const auto st = stationary_distribution({lambda, mu, eps, d_th, 0});
  const double c = eps * st.sigma / (lambda - mu);
  for (std::int64_t d = 0; d < d_th; ++d)
    CHECK(st.pi[d] == doctest::Approx(std::pow(lambda / mu, d) * (st.pi[0] - c) + c).epsilon(1e-8));
}

TEST_CASE("beta by Monte Carlo hitting time") {
  const double lambda = 0.5, mu = 0.5, eps = 0.3;
  const std::int64_t d_th = 3;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int episodes = 200000;
  double total = 0.0, total_sq = 0.0;
  for (int e = 0; e < episodes; ++e) {
    std::int64_t d = d_th;
    double slots = 0.0;
    while (true) {
      slots += 1.0;
      if (u(gen) < eps) break;
      const double x = u(gen);
      if (x < lambda) ++d;
      else if (x < lambda + mu) --d;
      if (d < d_th) break;
    }
    total += slots;
    total_sq += slots * slots;
  }
  const double mean = total / episodes;
  const double se = std::sqrt((total_sq / episodes - mean * mean) / episodes);
  const double b = beta({lambda, mu, eps, d_th, 0});
  CHECK(std::abs(b - mean) < 4.0 * se);
  CHECK(beta({0.3, 0.6, 1.0, 2, 0}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("beta closed form for lambda = mu") {
  const double lambda = 0.5, eps = 0.5;  // nu N = 2
  const double a = 2 * lambda * (1 - eps) + eps, b = -lambda * (1 - eps);
  const double want = (1 + a / (2 * b) + std::sqrt(a * a / (4 * b * b) - 1)) / (a + 2 * b);
  CHECK(beta_closed_form(lambda, eps) == doctest::Approx(want).epsilon(1e-12));
  CHECK(beta({lambda, lambda, eps, 1, 0}) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("upper-block truncation is stable") {
  const MeanFieldChain c{0.5, 0.5, 0.05, 4, 0};
  const auto st = stationary_distribution(c);
  const auto twice = stationary_distribution({0.5, 0.5, 0.05, 4, 2 * st.k});
  CHECK(std::abs(st.beta - twice.beta) < 1e-8);
  CHECK(std::abs(st.sigma - twice.sigma) < 1e-8);
}

TEST_CASE("threshold root against the quadratic for lambda = mu") {
  for (double n : {20.0, 100.0, 400.0}) {
    const double lambda = 0.5, nu = 5.0 / n;
    const auto sol = solve_threshold(lambda, lambda, nu, n);
    // 1/nu = d/(lambda beta) + eps d(d-1)/(2 lambda) + 1, solved as a quadratic in d
    const double eps = 1.0 / (nu * n), b = sol.beta;
    const double qa = eps / (2 * lambda), qb = 1.0 / (lambda * b) - eps / (2 * lambda), qc = 1.0 - 1.0 / nu;
    const double d = (-qb + std::sqrt(qb * qb - 4 * qa * qc)) / (2 * qa);
    CHECK(sol.root == doctest::Approx(d).epsilon(1e-9));
    CHECK(closed_form_threshold(lambda, nu, n) == doctest::Approx(d).epsilon(1e-9));
    CHECK(sol.d_th == static_cast<std::int64_t>(std::ceil(d)));
  }
}

TEST_CASE("sigma shrinks as the threshold rises") {
  double prev = 2.0;
  for (std::int64_t d = 1; d <= 60; ++d) {
    const double s = stationary_distribution({0.4, 0.4, 0.05, d, 0}).sigma;
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("contention probability") {
  CHECK(solve_ptx(0.02, 50, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(solve_ptx(0.04, 50, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
  const double p = solve_ptx(0.1, 50, 10.0);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  const double k = 5.0;
  const double residual = std::pow(1 - p, k) - 10.0 * (k * p + std::pow(1 - p, k) - 1);
  CHECK(std::abs(residual) < 1e-10);
  CHECK(contenders(0.001, 50) == 1);
}

TEST_CASE("threshold mapping") {
  const auto psi = build_mapping(5.0, 0.3);
  CHECK(psi(5.0) == 0.3);
  CHECK(psi(4.999) == 0.0);
  CHECK(build_mapping(0.0, 0.7)(0.0) == 0.7);
  CHECK_THROWS_AS(build_mapping(1.0, 0.0), InvalidArgument);
}

TEST_CASE("index threshold from d") {
  CHECK(index_threshold_from_d(3, ErrorFunction::linear(), 0.0) == doctest::Approx(10.0));
  CHECK(index_threshold_from_d(3, ErrorFunction::linear(), 0.1) == doctest::Approx(9.0));
  CHECK(index_threshold_from_d(1, ErrorFunction::quadratic(2.0), 0.0) == doctest::Approx(2.0));
}

TEST_CASE("plan") {
  PlanInput in;
  in.nu = 0.1;
  in.n = 50;
  const auto sol = plan(in);
  CHECK(sol.sigma_root == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(sol.d_th == static_cast<std::int64_t>(std::ceil(sol.root - 1e-9)));
  CHECK(sol.i_th == doctest::Approx(whittle_random_walk(sol.d_th, in.f)));
  CHECK(sol.p_tx == doctest::Approx(solve_ptx(0.1, 50, 10.0)));

  in.nu = 1.0;
  const auto all = plan(in);
  CHECK(all.d_th == 1);
  CHECK(all.i_th == doctest::Approx(whittle_random_walk(1, in.f)));

  in.nu = 1.5;
  CHECK_THROWS_AS(plan(in), InvalidArgument);
}
