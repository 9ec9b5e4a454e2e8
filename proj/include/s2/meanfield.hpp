#pragma once

#include <cstdint>
#include <vector>

#include "s2/domain.hpp"

namespace s2::meanfield {

/// Threshold-controlled birth-death chain of one node's status difference.
/// States below d_th move up with lambda and down with mu (state 0 stays with
/// 1 - lambda). From states at or above d_th the node is reset to 0 with
/// probability eps; otherwise it moves like the lower states.
struct MeanFieldChain {
  double lambda = 0.5;
  double mu = 0.5;
  double eps = 0.1;
  std::int64_t d_th = 1;
  std::int64_t k = 0;  // upper-block length; 0 grows it automatically

  void validate() const;
};

struct Stationary {
  std::vector<double> pi;  // states 0 .. d_th + k - 1
  double sigma = 0.0;      // mass at or above d_th
  double beta = 0.0;       // expected slots spent in the upper block per entry
  std::int64_t k = 0;      // upper-block length actually used
};

/// Stationary law from the lower-block recursion and the upper-block
/// tridiagonal solve, with a reflecting top. When chain.k == 0 the block is
/// doubled until the top-state mass is < 1e-10 and sigma, beta move by < 1e-8.
Stationary stationary_distribution(const MeanFieldChain& chain);

/// e1' (I - P_hat)^{-1} 1 on the truncated upper block (auto-grown if k == 0).
double beta(const MeanFieldChain& chain);

/// Closed form of beta for lambda = mu on the infinite upper block.
double beta_closed_form(double lambda, double eps);

/// Right-hand side of the threshold equation: 1/sigma as a function of a
/// real threshold d. Uses the lambda = mu branch when |lambda - mu| < 1e-9.
double inverse_sigma(double lambda, double mu, double eps, double beta, double d);

struct ThresholdSolution {
  double root = 0.0;         // real solution of 1/nu = inverse_sigma(d)
  std::int64_t d_th = 1;     // ceil(root), at least 1
  double beta = 0.0;
  double eps = 0.0;
};

/// Numeric root of the threshold equation, with eps = 1/(nu N).
ThresholdSolution solve_threshold(double lambda, double mu, double nu, double n);

/// Closed-form root for lambda = mu (uses beta_closed_form).
double closed_form_threshold(double lambda, double nu, double n);

/// Number of contenders used by the contention equation: round(nu N), >= 1.
std::int64_t contenders(double nu, double n);

/// (1-p)^K - r (K p + (1-p)^K - 1) with r = t_slot / t_c.
double ptx_residual(double p, std::int64_t k, double slot_ratio);

/// Root in (0, 1] of ptx_residual by bisection.
double solve_ptx(double nu, double n, double slot_ratio);

/// Psi(I) = p_tx if I >= I_th, else 0.
struct Mapping {
  double i_th = 0.0;
  double p_tx = 1.0;

  double operator()(double index) const { return index >= i_th ? p_tx : 0.0; }
};

Mapping build_mapping(double i_th, double p_tx);

/// Index at the integer threshold, scaled for the channel error.
double index_threshold_from_d(std::int64_t d_th, const ErrorFunction& f, double p_e);

struct MeanFieldSolution {
  double root = 0.0;          // raw real threshold
  std::int64_t d_th = 1;
  double i_th = 0.0;
  double p_tx = 1.0;
  double sigma = 0.0;         // stationary mass at or above the integer threshold
  double sigma_root = 0.0;    // 1 / inverse_sigma(root)
  double beta = 0.0;
  double eps = 0.0;
  std::int64_t contenders = 1;
  bool closed_form = false;   // root taken from the lambda = mu closed form
};

struct PlanInput {
  double lambda = 0.5;
  double mu = 0.5;
  double nu = 0.1;
  double n = 50;
  double slot_ratio = 10.0;
  ErrorFunction f = ErrorFunction::linear();
  double p_e = 0.0;
};

/// Full operating point: threshold, index threshold, contention probability.
/// nu = 1 lets every node with a nonzero index contend (d_th = 1).
MeanFieldSolution plan(const PlanInput& in);

}  // namespace s2::meanfield
