#include "s2/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "s2/indices.hpp"
#include "s2/mdp.hpp"

namespace s2::meanfield {

namespace {

constexpr std::int64_t kFirstBlock = 64;
constexpr std::int64_t kMaxBlock = 100'000;

// Thomas algorithm for a strictly diagonally dominant tridiagonal system.
// sub[i] multiplies x[i-1], sup[i] multiplies x[i+1].
std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                      std::vector<double> sup, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
  return x;
}

struct UpperBlock {
  std::vector<double> occupancy;  // e1' (I - P_hat)^{-1}
  double beta = 0.0;
};

// I - P_hat on k upper states: up lambda(1-eps), down mu(1-eps), reset eps.
// The first state's down move and every reset leave the block; the last
// state's up move is folded back into itself.
UpperBlock upper_block(double lambda, double mu, double eps, std::int64_t k) {
  const auto n = static_cast<std::size_t>(k);
  const double keep = 1.0 - eps;
  const double gamma = 1.0 - lambda - mu;
  std::vector<double> diag(n, 1.0 - gamma * keep);
  diag[n - 1] -= lambda * keep;
  // Row form (I - P_hat) x = 1 gives beta; the transposed system gives the
  // occupancy row vector. Up moves sit above the diagonal.
  std::vector<double> up(n, -lambda * keep), down(n, -mu * keep);
  std::vector<double> ones(n, 1.0), e1(n, 0.0);
  e1[0] = 1.0;
  UpperBlock out;
  out.beta = solve_tridiagonal(down, diag, up, ones)[0];
  // Transpose: entry (i, i+1) becomes (i+1, i).
  out.occupancy = solve_tridiagonal(up, diag, down, e1);
  return out;
}

Stationary assemble(const MeanFieldChain& c, std::int64_t k) {
  const UpperBlock block = upper_block(c.lambda, c.mu, c.eps, k);
  // Lower states relative to sigma, from the cut equations
  // lambda pi_d = mu pi_{d+1} + eps sigma, run downwards from d_th - 1.
  const auto lower = static_cast<std::size_t>(c.d_th);
  std::vector<double> q(lower);
  q[lower - 1] = 1.0 / (c.lambda * block.beta);
  for (std::size_t d = lower - 1; d-- > 0;) q[d] = (c.mu * q[d + 1] + c.eps) / c.lambda;
  double inv_sigma = 1.0;
  for (double v : q) inv_sigma += v;
  if (!std::isfinite(inv_sigma))
    throw mdp::SolverError("stationary distribution overflows for mu/lambda = " +
                           std::to_string(c.mu / c.lambda) + " at d_th = " + std::to_string(c.d_th));

  Stationary out;
  out.k = k;
  out.beta = block.beta;
  out.sigma = 1.0 / inv_sigma;
  out.pi.reserve(lower + block.occupancy.size());
  for (double v : q) out.pi.push_back(v * out.sigma);
  // pi_hat = lambda pi_{d_th - 1} e1' (I - P_hat)^{-1}
  const double entry = c.lambda * out.pi.back();
  for (double v : block.occupancy) out.pi.push_back(entry * v);
  return out;
}

}  // namespace

void MeanFieldChain::validate() const {
  if (!(lambda > 0.0 && mu > 0.0 && lambda + mu <= 1.0 + 1e-12))
    throw InvalidArgument("mean-field chain needs lambda, mu > 0 and lambda + mu <= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("eps must be in (0, 1]");
  if (d_th < 1) throw InvalidArgument("d_th must be at least 1");
  if (k < 0 || k > kMaxBlock) throw InvalidArgument("upper-block length must be in 0..100000");
}

Stationary stationary_distribution(const MeanFieldChain& chain) {
  chain.validate();
  if (chain.k > 0) return assemble(chain, chain.k);
  Stationary prev = assemble(chain, kFirstBlock);
  for (std::int64_t k = 2 * kFirstBlock;; k = std::min(2 * k, kMaxBlock)) {
    Stationary cur = assemble(chain, k);
    const bool stable = std::abs(cur.sigma - prev.sigma) < 1e-8 &&
                        std::abs(cur.beta - prev.beta) < 1e-8 * std::max(1.0, cur.beta);
    if (stable && cur.pi.back() < 1e-10) return cur;
    if (k == kMaxBlock)
      throw mdp::SolverError("upper block did not reach the tail tolerance at K = 100000 (top mass " +
                             std::to_string(cur.pi.back()) + ")");
    prev = std::move(cur);
  }
}

double beta(const MeanFieldChain& chain) {
  MeanFieldChain c = chain;
  c.d_th = 1;
  return stationary_distribution(c).beta;
}

double beta_closed_form(double lambda, double eps) {
  const double a = 2.0 * lambda * (1.0 - eps) + eps;
  const double b = -lambda * (1.0 - eps);
  if (b == 0.0) throw InvalidArgument("closed-form beta is singular at eps = 1");
  const double r = a / (2.0 * b);
  return (1.0 + r + std::sqrt(r * r - 1.0)) / (a + 2.0 * b);
}

double inverse_sigma(double lambda, double mu, double eps, double beta, double d) {
  if (std::abs(lambda - mu) < 1e-9)
    return d / (lambda * beta) + eps * (d - 1.0) * d / (2.0 * lambda) + 1.0;
  const double r = lambda / mu;
  return (std::pow(r, 1.0 - d) - r) / (1.0 - r) * (1.0 / (lambda * beta) - eps / (lambda - mu)) +
         eps * d / (lambda - mu) + 1.0;
}

ThresholdSolution solve_threshold(double lambda, double mu, double nu, double n) {
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("nu must be in (0, 1)");
  if (!(nu * n > 1.0)) throw InvalidArgument("threshold equation needs nu N > 1");
  ThresholdSolution out;
  out.eps = 1.0 / (nu * n);
  out.beta = beta({lambda, mu, out.eps, 1, 0});
  const double target = 1.0 / nu;
  auto g = [&](double d) { return inverse_sigma(lambda, mu, out.eps, out.beta, d) - target; };

  double lo = 0.0, hi = 1.0;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) throw mdp::SolverError("threshold equation has no sign change below d = 1e9");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  out.root = 0.5 * (lo + hi);
  out.d_th = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(out.root - 1e-9)));
  return out;
}

double closed_form_threshold(double lambda, double nu, double n) {
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("nu must be in (0, 1)");
  const double k = nu * n;
  if (!(k > 1.0)) throw InvalidArgument("closed form needs nu N > 1");
  const double b = beta_closed_form(lambda, 1.0 / k);
  const double disc = k * k / (b * b) - k / b + 0.25 - 2.0 * lambda * k * (1.0 - 1.0 / nu);
  return 0.5 - k / b + std::sqrt(disc);
}

std::int64_t contenders(double nu, double n) {
  return std::max<std::int64_t>(1, std::llround(nu * n));
}

double ptx_residual(double p, std::int64_t k, double slot_ratio) {
  const double idle = std::pow(1.0 - p, static_cast<double>(k));
  return idle - slot_ratio * (static_cast<double>(k) * p + idle - 1.0);
}

double solve_ptx(double nu, double n, double slot_ratio) {
  if (!(slot_ratio > 0.0)) throw InvalidArgument("slot ratio must be positive");
  if (!(nu > 0.0 && nu <= 1.0) || !(nu * n >= 1.0 - 1e-12))
    throw InvalidArgument("contention equation needs 0 < nu <= 1 and nu N >= 1");
  const std::int64_t k = contenders(nu, n);
  if (k == 1) return 1.0;
  // residual(0) = 1 > 0 and residual(1) = -ratio (k - 1) < 0
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-16) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (ptx_residual(mid, k, slot_ratio) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Mapping build_mapping(double i_th, double p_tx) {
  if (!(i_th >= 0.0)) throw InvalidArgument("index threshold must be nonnegative");
  if (!(p_tx > 0.0 && p_tx <= 1.0)) throw InvalidArgument("p_tx must be in (0, 1]");
  return {i_th, p_tx};
}

double index_threshold_from_d(std::int64_t d_th, const ErrorFunction& f, double p_e) {
  if (d_th < 1) throw InvalidArgument("d_th must be at least 1");
  return whittle_random_walk_unreliable(d_th, f, p_e);
}

MeanFieldSolution plan(const PlanInput& in) {
  if (!(in.nu > 0.0 && in.nu <= 1.0)) throw InvalidArgument("nu must be in (0, 1]");
  if (!(in.n >= 1.0)) throw InvalidArgument("N must be at least 1");
  MeanFieldSolution out;
  out.eps = std::min(1.0, 1.0 / (in.nu * in.n));
  if (in.nu >= 1.0) {
    out.root = 0.0;
    out.d_th = 1;
    out.sigma_root = 1.0;
  } else {
    const ThresholdSolution ts = solve_threshold(in.lambda, in.mu, in.nu, in.n);
    out.root = ts.root;
    if (std::abs(in.lambda - in.mu) < 1e-9 && in.nu * in.n > 1.5) {
      out.root = closed_form_threshold(in.lambda, in.nu, in.n);
      out.closed_form = true;
    }
    out.d_th = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(out.root - 1e-9)));
    out.sigma_root = 1.0 / inverse_sigma(in.lambda, in.mu, out.eps, ts.beta, out.root);
  }
  const Stationary st = stationary_distribution({in.lambda, in.mu, out.eps, out.d_th, 0});
  out.sigma = st.sigma;
  out.beta = st.beta;
  out.i_th = index_threshold_from_d(out.d_th, in.f, in.p_e);
  out.p_tx = solve_ptx(in.nu, in.n, in.slot_ratio);
  out.contenders = contenders(in.nu, in.n);
  return out;
}

}  // namespace s2::meanfield
