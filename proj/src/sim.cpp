#include "s2/sim.hpp"

#include <cmath>

#include "s2/mdp.hpp"

namespace s2::sim {

namespace {

constexpr double kTimeSlack = 1e-9;

struct NodeRuntime {
  bool two_state = false;
  RandomWalkSource walk;
  double flip = 0.5;
  Status base = 0;             // last delivered status (drift predictor)
  std::int64_t since = 0;      // slots since that delivery
};

class Network {
 public:
  explicit Network(const SimConfig& c) : c_(c), rng_(c.seed), policy_(c.policy, c.nodes, mapping(c)) {
    const std::size_t n = c.nodes.size();
    state_.resize(n);
    rt_.resize(n);
    p_e_.resize(n);
    report_.node_error.assign(n, 0.0);
    report_.node_aoi.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const NodeParams& p = c.nodes[i];
      rt_[i].two_state = std::holds_alternative<TwoStateSource>(p.source);
      if (rt_[i].two_state) {
        rt_[i].flip = std::get<TwoStateSource>(p.source).p;
      } else {
        rt_[i].walk = std::get<RandomWalkSource>(p.source);
      }
      p_e_[i] = p.p_e;
      NodeState& s = state_[i];
      s.p_e = p.p_e;
      if (c.initial == InitialRule::offset) s.s = c.initial_offset;
      s.refresh();
      // generate-at-will: a random-walk node always holds a fresh sample
      s.has_packet = !rt_[i].two_state;
    }
    report_.plan = plan_;
  }

  SimReport run() {
    if (policy_.kind() == PolicyKind::etsu && c_.contention == ContentionModel::mini_slot)
      run_frames();
    else
      run_slots();
    finish();
    return report_;
  }

 private:
  std::optional<meanfield::Mapping> mapping(const SimConfig& c) {
    if (c.policy.kind != PolicyKind::etsu) return std::nullopt;
    if (c.etsu_mapping) return c.etsu_mapping;
    plan_ = etsu_plan(c.nodes, c.policy.nu, c.slot_ratio);
    return meanfield::build_mapping(plan_->i_th, plan_->p_tx);
  }

  bool done() const { return report_.slots >= c_.horizon; }

  Status packet_status(std::size_t i) const { return state_[i].s; }

  std::int64_t packet_age(std::size_t i) const {
    return rt_[i].two_state && policy_.kind() == PolicyKind::separate_aoi ? state_[i].a : 0;
  }

  void deliver(std::size_t i) {
    on_feedback(state_[i], Outcome::ack, packet_status(i), packet_age(i));
    rt_[i].base = state_[i].s_hat;
    rt_[i].since = 0;
    if (!rt_[i].two_state) state_[i].has_packet = true;
  }

  // Resolves one transmit set on a data slot.
  void resolve(const std::vector<int>& tx) {
    if (tx.empty()) {
      ++report_.idles;
    } else if (tx.size() > 1) {
      ++report_.collisions;
    } else {
      const auto i = static_cast<std::size_t>(tx.front());
      if (rng_.uniform(Stream::channel, i, attempt_++) < p_e_[i]) {
        ++report_.channel_failures;
      } else {
        ++report_.successes;
        deliver(i);
      }
    }
  }

  void run_slots() {
    while (!done()) {
      const Action act = policy_.decide(state_, report_.slots, rng_);
      if (act.transmit.size() > 1 && policy_.information() != InformationModel::decentralized)
        throw mdp::SolverError("centralized policy scheduled more than one node");
      resolve(act.transmit);
      report_.elapsed += 1.0;
      step();
    }
  }

  void run_frames() {
    FrameHooks hooks;
    hooks.contenders = [this](std::vector<Contender>& out) {
      out.clear();
      for (std::size_t i = 0; i < state_.size(); ++i) {
        const double p = policy_.contention_probability(i, state_[i]);
        if (p > 0.0) out.push_back({static_cast<int>(i), p});
      }
    };
    hooks.advance = [this](double dt) { return advance(dt); };
    hooks.deliver = [this](int i) { deliver(static_cast<std::size_t>(i)); };
    std::uint64_t round = 0;
    while (!done()) {
      const FrameResult r = run_contention_frame(hooks, p_e_, c_.slot_ratio, rng_, round, attempt_);
      report_.idle_minislots += r.idle_minislots;
      switch (r.outcome) {
        case FrameOutcome::success: ++report_.successes; break;
        case FrameOutcome::channel_failure: ++report_.channel_failures; break;
        case FrameOutcome::collision: ++report_.collisions; break;
        case FrameOutcome::idle: ++report_.idles; break;
        case FrameOutcome::truncated: break;
      }
    }
  }

  // Virtual time; sources step at every whole-slot crossing.
  bool advance(double dt) {
    report_.elapsed += dt;
    clock_ += dt;
    while (clock_ >= 1.0 - kTimeSlack && !done()) {
      clock_ -= 1.0;
      step();
    }
    if (clock_ < 0.0) clock_ = 0.0;
    return !done();
  }

  void step() {
    const auto t = static_cast<std::uint64_t>(report_.slots);
    for (std::size_t i = 0; i < state_.size(); ++i) {
      NodeState& s = state_[i];
      NodeRuntime& r = rt_[i];
      const double u = rng_.uniform(Stream::source, i, t);
      const Status before = s.s;
      Status next;
      if (r.two_state) {
        next = u < r.flip ? 1 - before : before;
      } else if (u < r.walk.q_up) {
        next = saturating_add(before, 1);
      } else if (u < r.walk.q_up + r.walk.q_down) {
        next = saturating_add(before, -1);
      } else {
        next = before;
      }
      ++r.since;
      if (c_.drift_predictor && !r.two_state)
        s.s_hat = saturating_add(r.base, std::llround(r.walk.drift() * static_cast<double>(r.since)));
      if (c_.d_cap > 0 && abs_difference(next, s.s_hat) > c_.d_cap &&
          abs_difference(next, s.s_hat) > abs_difference(before, s.s_hat))
        next = before;
      s.s = next;
      s.refresh();
      ++s.h;
      if (r.two_state) {
        if (s.has_packet) ++s.a;
        if (next != before) {
          s.has_packet = true;
          s.a = 0;
        }
      }
    }
    ++report_.slots;
    if (report_.slots > c_.warmup) measure();
  }

  void measure() {
    const auto n = static_cast<double>(state_.size());
    double err = 0.0, aoi = 0.0, above = 0.0;
    for (std::size_t i = 0; i < state_.size(); ++i) {
      const NodeState& s = state_[i];
      const ErrorFunction& f = c_.nodes[i].f;
      const double e = f.weight() * f.eval(s.d);
      err += e;
      aoi += static_cast<double>(s.h);
      report_.node_error[i] += e;
      report_.node_aoi[i] += static_cast<double>(s.h);
      if (c_.track_threshold > 0 && s.d >= c_.track_threshold) above += 1.0;
    }
    sum_error_ += err / n;
    sum_aoi_ += aoi / n;
    sum_above_ += above / n;
    ++report_.measured;
  }

  void finish() {
    if (report_.measured == 0) return;
    const auto m = static_cast<double>(report_.measured);
    report_.avg_weighted_error = sum_error_ / m;
    report_.avg_aoi = sum_aoi_ / m;
    report_.fraction_above = sum_above_ / m;
    for (auto& v : report_.node_error) v /= m;
    for (auto& v : report_.node_aoi) v /= m;
  }

  const SimConfig& c_;
  CounterRng rng_;
  std::optional<meanfield::MeanFieldSolution> plan_;
  Policy policy_;
  std::vector<NodeState> state_;
  std::vector<NodeRuntime> rt_;
  std::vector<double> p_e_;
  SimReport report_;
  std::uint64_t attempt_ = 0;
  double clock_ = 0.0;
  double sum_error_ = 0.0, sum_aoi_ = 0.0, sum_above_ = 0.0;
};

}  // namespace

void SimConfig::validate() const {
  if (nodes.empty()) throw InvalidArgument("simulation needs at least one node");
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
  if (warmup < 0 || warmup >= horizon) throw InvalidArgument("warmup must be in [0, horizon)");
  if (!(slot_ratio > 0.0)) throw InvalidArgument("slot_ratio must be positive");
  if (d_cap < 0) throw InvalidArgument("d_cap must be nonnegative");
  if (track_threshold < 0) throw InvalidArgument("track_threshold must be nonnegative");
  if (initial == InitialRule::offset && initial_offset < 0)
    throw InvalidArgument("initial offset must be nonnegative");
  for (const auto& n : nodes) {
    if (!(n.p_e >= 0.0 && n.p_e <= 1.0)) throw InvalidArgument("p_e must be in [0, 1]");
    if (!(n.f.weight() >= 0.0)) throw InvalidArgument("weights must be nonnegative");
    if (const auto* t = std::get_if<TwoStateSource>(&n.source)) TwoStateSource::make(t->p);
    if (const auto* w = std::get_if<RandomWalkSource>(&n.source))
      RandomWalkSource::make(w->q_up, w->q_down, w->q_stay);
    if (std::holds_alternative<TwoStateSource>(n.source) && initial == InitialRule::offset &&
        initial_offset > 1)
      throw InvalidArgument("two-state sources take an initial offset of 0 or 1");
  }
  if (policy.kind == PolicyKind::etsu) {
    if (!(policy.nu > 0.0 && policy.nu <= 1.0)) throw InvalidArgument("etsu nu must be in (0, 1]");
    if (!etsu_mapping)
      for (const auto& n : nodes)
        if (!std::holds_alternative<RandomWalkSource>(n.source))
          throw InvalidArgument("etsu planning needs random-walk sources");
  }
}

SimReport run(const SimConfig& config) {
  config.validate();
  Network net(config);
  return net.run();
}

FrameResult run_contention_frame(const FrameHooks& hooks, std::span<const double> p_e,
                                 double slot_ratio, const CounterRng& rng, std::uint64_t& round,
                                 std::uint64_t& attempt) {
  FrameResult out;
  std::vector<Contender> who;
  std::vector<int> tx;
  for (;;) {
    hooks.contenders(who);
    if (who.empty()) {
      out.outcome = FrameOutcome::idle;
      out.elapsed += 1.0;
      hooks.advance(1.0);
      return out;
    }
    tx.clear();
    const std::uint64_t r = round++;
    for (const auto& c : who)
      if (rng.uniform(Stream::contention, static_cast<std::uint64_t>(c.node), r) < c.probability)
        tx.push_back(c.node);
    if (tx.empty()) {
      ++out.idle_minislots;
      out.elapsed += 1.0 / slot_ratio;
      if (!hooks.advance(1.0 / slot_ratio)) {
        out.outcome = FrameOutcome::truncated;
        return out;
      }
      continue;
    }
    if (tx.size() > 1) {
      out.outcome = FrameOutcome::collision;
    } else {
      out.winner = tx.front();
      const auto i = static_cast<std::size_t>(out.winner);
      if (rng.uniform(Stream::channel, i, attempt++) < p_e[i]) {
        out.outcome = FrameOutcome::channel_failure;
      } else {
        out.outcome = FrameOutcome::success;
        if (hooks.deliver) hooks.deliver(out.winner);
      }
    }
    out.elapsed += 1.0;
    hooks.advance(1.0);
    return out;
  }
}

}  // namespace s2::sim
