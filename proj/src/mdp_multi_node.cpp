#include <algorithm>
#include <cmath>
#include <limits>

#include "s2/mdp.hpp"

namespace s2::mdp {

namespace {

struct Kernel {
  // rows[d] lists (to, prob) for d = 0..d_max
  std::vector<std::vector<Transition>> rows;
};

Kernel walk_kernel(const RandomWalkSource& w, std::int64_t d_max) {
  Kernel k;
  k.rows.resize(static_cast<std::size_t>(d_max) + 1);
  k.rows[0] = {{1, w.q_up + w.q_down}};
  if (w.q_stay > 0.0) k.rows[0].push_back({0, w.q_stay});
  for (std::int64_t d = 1; d <= d_max; ++d) {
    auto& row = k.rows[static_cast<std::size_t>(d)];
    row.push_back({static_cast<int>(std::min(d + 1, d_max)), w.q_up});
    row.push_back({static_cast<int>(d - 1), w.q_down});
    if (w.q_stay > 0.0) row.push_back({static_cast<int>(d), w.q_stay});
  }
  return k;
}

Kernel update_kernel(const Kernel& walk, double p_e) {
  Kernel k;
  k.rows.resize(walk.rows.size());
  for (std::size_t d = 0; d < walk.rows.size(); ++d) {
    for (const auto& t : walk.rows[0]) k.rows[d].push_back({t.to, (1.0 - p_e) * t.prob});
    if (p_e > 0.0)
      for (const auto& t : walk.rows[d]) k.rows[d].push_back({t.to, p_e * t.prob});
  }
  return k;
}

class JointChain {
 public:
  JointChain(std::span<const NodeSpec> nodes, std::int64_t d_max)
      : n_(nodes.size()), radix_(static_cast<std::size_t>(d_max) + 1) {
    if (nodes.empty() || nodes.size() > 3) throw InvalidArgument("multi-node solver supports 1..3 nodes");
    if (d_max < 1 || d_max > 20) throw InvalidArgument("multi-node solver supports d_max in 1..20");
    size_ = 1;
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& spec = nodes[i];
      if (std::abs(spec.walk.q_up - spec.walk.q_down) > 1e-12)
        throw InvalidArgument("multi-node solver needs symmetric walks (|s - s_hat| is then Markov)");
      if (!(spec.p_e >= 0.0 && spec.p_e < 1.0))
        throw InvalidArgument("transmission error probability must be in [0, 1)");
      stride_.push_back(size_);
      size_ *= radix_;
      idle_.push_back(walk_kernel(spec.walk, d_max));
      upd_.push_back(update_kernel(idle_.back(), spec.p_e));
    }
    cost_.assign(size_, 0.0);
    for (std::size_t x = 0; x < size_; ++x) {
      double c = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const auto d = static_cast<std::int64_t>((x / stride_[i]) % radix_);
        c += nodes[i].f.weight() * nodes[i].f.eval(d);
      }
      cost_[x] = c / static_cast<double>(n_);
    }
  }

  std::size_t size() const { return size_; }
  std::size_t nodes() const { return n_; }
  std::size_t radix() const { return radix_; }
  const std::vector<double>& cost() const { return cost_; }

  void apply(const Kernel& k, std::size_t axis, const std::vector<double>& in,
             std::vector<double>& out) const {
    const std::size_t stride = stride_[axis];
    for (std::size_t x = 0; x < size_; ++x) {
      const auto d = (x / stride) % radix_;
      const std::size_t base = x - d * stride;
      double acc = 0.0;
      for (const auto& t : k.rows[d]) acc += t.prob * in[base + static_cast<std::size_t>(t.to) * stride];
      out[x] = acc;
    }
  }

  // expected[0] is idle, expected[1 + a] updates node a.
  void expectations(const std::vector<double>& f, std::vector<std::vector<double>>& expected,
                    std::vector<double>& scratch_a, std::vector<double>& scratch_b) const {
    expected.resize(n_ + 1);
    for (auto& e : expected) e.resize(size_);
    for (std::size_t a = 0; a < n_; ++a) {
      // Idle kernels on every axis except a.
      const std::vector<double>* cur = &f;
      bool into_a = true;
      for (std::size_t i = 0; i < n_; ++i) {
        if (i == a) continue;
        auto& dst = into_a ? scratch_a : scratch_b;
        apply(idle_[i], i, *cur, dst);
        cur = &dst;
        into_a = !into_a;
      }
      apply(upd_[a], a, *cur, expected[1 + a]);
      if (a == 0) apply(idle_[a], a, *cur, expected[0]);
    }
  }

  std::size_t encode(std::span<const std::int64_t> d) const {
    std::size_t x = 0;
    for (std::size_t i = 0; i < n_; ++i) x += static_cast<std::size_t>(d[i]) * stride_[i];
    return x;
  }

  std::vector<std::int64_t> decode(std::size_t x) const {
    std::vector<std::int64_t> d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = static_cast<std::int64_t>((x / stride_[i]) % radix_);
    return d;
  }

 private:
  std::size_t n_;
  std::size_t radix_;
  std::size_t size_ = 1;
  std::vector<std::size_t> stride_;
  std::vector<Kernel> idle_;
  std::vector<Kernel> upd_;
  std::vector<double> cost_;
};

// Damped relative value iteration. With `fixed` set, actions come from it
// and the result is the average cost of that policy.
MultiNodeSolution run_rvi(const JointChain& chain, const RviOptions& options,
                          const std::vector<int>* fixed) {
  const std::size_t n = chain.size();
  constexpr double kDamping = 0.5;  // |s - s_hat| flips parity every slot
  std::vector<double> f(n, 0.0), tf(n, 0.0), sa(n), sb(n);
  std::vector<std::vector<double>> expected;
  std::vector<int> policy(n, kIdle);
  MultiNodeSolution out;
  bool converged = false;
  for (long k = 0; k < options.max_iterations; ++k) {
    chain.expectations(f, expected, sa, sb);
    for (std::size_t x = 0; x < n; ++x) {
      int act = kIdle;
      double best = expected[0][x];
      if (fixed != nullptr) {
        act = (*fixed)[x];
        best = expected[static_cast<std::size_t>(act + 1)][x];
      } else {
        const double tol = 1e-12 * std::max(1.0, std::abs(best));
        for (std::size_t a = 0; a < chain.nodes(); ++a) {
          const double v = expected[a + 1][x];
          if (v < best - tol) {
            best = v;
            act = static_cast<int>(a);
          }
        }
      }
      policy[x] = act;
      tf[x] = chain.cost()[x] + best;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, scale = 1.0;
    for (std::size_t x = 0; x < n; ++x) {
      const double g = tf[x] - f[x];
      lo = std::min(lo, g);
      hi = std::max(hi, g);
      scale = std::max(scale, std::abs(f[x]));
    }
    out.iterations = k + 1;
    out.residual = hi - lo;
    out.average_cost = 0.5 * (lo + hi);
    if (out.residual <= options.tolerance * scale) {
      converged = true;
      break;
    }
    const double g_ref = tf[0] - f[0];
    for (std::size_t x = 0; x < n; ++x) f[x] += kDamping * ((tf[x] - f[x]) - g_ref);
  }
  if (!converged)
    throw SolverError("multi-node relative value iteration did not converge; span residual " +
                      std::to_string(out.residual));
  out.relative = std::move(f);
  out.policy = std::move(policy);
  out.dims.assign(chain.nodes(), static_cast<std::int64_t>(chain.radix()));
  return out;
}

}  // namespace

std::size_t MultiNodeSolution::encode(std::span<const std::int64_t> d) const {
  std::size_t x = 0, stride = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    x += static_cast<std::size_t>(d[i]) * stride;
    stride *= static_cast<std::size_t>(dims[i]);
  }
  return x;
}

std::vector<std::int64_t> MultiNodeSolution::decode(std::size_t state) const {
  std::vector<std::int64_t> d(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    d[i] = static_cast<std::int64_t>(state % static_cast<std::size_t>(dims[i]));
    state /= static_cast<std::size_t>(dims[i]);
  }
  return d;
}

MultiNodeSolution multi_node_optimal(std::span<const NodeSpec> nodes, std::int64_t d_max,
                                     const RviOptions& options) {
  const JointChain chain(nodes, d_max);
  return run_rvi(chain, options, nullptr);
}

double multi_node_policy_cost(std::span<const NodeSpec> nodes, std::int64_t d_max,
                              const MultiNodeRule& rule, const RviOptions& options) {
  const JointChain chain(nodes, d_max);
  std::vector<int> fixed(chain.size());
  for (std::size_t x = 0; x < chain.size(); ++x) {
    const auto d = chain.decode(x);
    const int a = rule(d);
    if (a != kIdle && (a < 0 || a >= static_cast<int>(nodes.size())))
      throw InvalidArgument("rule returned an invalid node id");
    fixed[x] = a;
  }
  return run_rvi(chain, options, &fixed).average_cost;
}

}  // namespace s2::mdp
