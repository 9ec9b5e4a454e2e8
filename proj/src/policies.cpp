#include "s2/policies.hpp"

#include <algorithm>
#include <array>

#include "s2/mdp.hpp"

namespace s2 {

namespace {

constexpr std::array<std::pair<PolicyKind, const char*>, 8> kNames{{
    {PolicyKind::optimal_two_state, "optimal_two_state"},
    {PolicyKind::centralized_whittle, "centralized_whittle"},
    {PolicyKind::etsu, "etsu"},
    {PolicyKind::separate_aoi, "separate_aoi"},
    {PolicyKind::aoi_error_index, "aoi_error_index"},
    {PolicyKind::max_difference, "max_difference"},
    {PolicyKind::round_robin, "round_robin"},
    {PolicyKind::random, "random"},
}};

bool all_two_state(std::span<const NodeParams> nodes) {
  return std::all_of(nodes.begin(), nodes.end(), [](const NodeParams& n) {
    return std::holds_alternative<TwoStateSource>(n.source);
  });
}

}  // namespace

InformationModel information_model(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::optimal_two_state:
    case PolicyKind::max_difference:
      return InformationModel::genie;
    case PolicyKind::etsu:
      return InformationModel::decentralized;
    default:
      return InformationModel::centralized;
  }
}

std::string to_string(PolicyKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
  for (const auto& [k, n] : kNames)
    if (name == n) return k;
  throw InvalidArgument("unknown policy '" + name + "'");
}

void on_feedback(NodeState& node, Outcome outcome, Status delivered, std::int64_t packet_age) {
  if (outcome != Outcome::ack) return;
  node.s_hat = delivered;
  node.refresh();
  node.h = packet_age;
  node.has_packet = false;
  node.a = 0;
}

Policy::Policy(PolicySpec spec, std::vector<NodeParams> nodes,
               std::optional<meanfield::Mapping> mapping)
    : spec_(spec), nodes_(std::move(nodes)), mapping_(mapping) {
  if (nodes_.empty()) throw InvalidArgument("a policy needs at least one node");
  for (const auto& n : nodes_) {
    if (!(n.p_e >= 0.0 && n.p_e <= 1.0)) throw InvalidArgument("p_e must be in [0, 1]");
    tables_.emplace_back(n.f);
  }
  if (all_two_state(nodes_))
    for (const auto& n : nodes_) flip_p_.push_back(std::get<TwoStateSource>(n.source).p);
  if (spec_.kind == PolicyKind::optimal_two_state && flip_p_.empty())
    throw InvalidArgument("optimal_two_state needs two-state sources at every node");
  if (spec_.kind == PolicyKind::etsu && !mapping_)
    throw InvalidArgument("etsu needs an index-to-probability mapping");
}

const meanfield::Mapping& Policy::mapping() const {
  if (!mapping_) throw InvalidArgument("policy has no contention mapping");
  return *mapping_;
}

double Policy::index(std::size_t node, const NodeState& own) {
  const NodeParams& p = nodes_.at(node);
  switch (spec_.kind) {
    case PolicyKind::separate_aoi:
      if (!flip_p_.empty()) return own.has_packet ? aoi_separate_index(own.a, own.b(), flip_p_[node]) : 0.0;
      return aoi_error_index(own.h, std::min(p.p_e, 1.0), p.f.weight());
    case PolicyKind::aoi_error_index:
      return aoi_error_index(own.h, std::min(p.p_e, 1.0), p.f.weight());
    case PolicyKind::max_difference:
      return p.f.weight() * static_cast<double>(own.d);
    default:
      // p_e = 1 never delivers; its index is 0
      return p.p_e >= 1.0 ? 0.0 : tables_[node].unreliable(own.d, p.p_e);
  }
}

double Policy::contention_probability(std::size_t node, const NodeState& own) {
  if (spec_.kind != PolicyKind::etsu) throw InvalidArgument("contention probability is defined for etsu only");
  return (*mapping_)(index(node, own));
}

int Policy::argmax_index(std::span<const NodeState> states, bool need_packet) {
  int best = mdp::kIdle;
  double best_value = 0.0;
  for (std::size_t n = 0; n < states.size(); ++n) {
    if (need_packet && !states[n].has_packet) continue;
    const double v = index(n, states[n]);
    if (need_packet ? (best == mdp::kIdle || v > best_value) : v > best_value) {
      best = static_cast<int>(n);
      best_value = v;
    }
  }
  return best;
}

Action Policy::decide(std::span<const NodeState> states, std::int64_t t, const CounterRng& rng) {
  if (states.size() != nodes_.size()) throw InvalidArgument("state vector does not match the node count");
  Action out;
  const auto n = static_cast<std::int64_t>(states.size());
  int pick = mdp::kIdle;
  switch (spec_.kind) {
    case PolicyKind::optimal_two_state: {
      std::uint32_t mask = 0;
      for (std::size_t i = 0; i < states.size() && i < 32; ++i)
        if (states[i].d != 0) mask |= std::uint32_t{1} << i;
      pick = mdp::theorem1_policy(mask, flip_p_);
      break;
    }
    case PolicyKind::separate_aoi:
      // two-state sources only hold a packet after a change
      pick = argmax_index(states, !flip_p_.empty());
      break;
    case PolicyKind::centralized_whittle:
    case PolicyKind::aoi_error_index:
    case PolicyKind::max_difference:
      pick = argmax_index(states, false);
      break;
    case PolicyKind::round_robin:
      pick = static_cast<int>(t % n);
      break;
    case PolicyKind::random:
      pick = static_cast<int>(std::min<std::int64_t>(
          n - 1, static_cast<std::int64_t>(rng.uniform(Stream::policy, 0, static_cast<std::uint64_t>(t)) *
                                           static_cast<double>(n))));
      break;
    case PolicyKind::etsu:
      for (std::size_t i = 0; i < states.size(); ++i) {
        const double p = contention_probability(i, states[i]);
        if (p > 0.0 && rng.uniform(Stream::contention, i, static_cast<std::uint64_t>(t)) < p)
          out.transmit.push_back(static_cast<int>(i));
      }
      return out;
  }
  if (pick != mdp::kIdle) out.transmit.push_back(pick);
  return out;
}

meanfield::MeanFieldSolution etsu_plan(std::span<const NodeParams> nodes, double nu,
                                       double slot_ratio) {
  if (nodes.empty()) throw InvalidArgument("etsu plan needs nodes");
  const auto* walk = std::get_if<RandomWalkSource>(&nodes.front().source);
  if (walk == nullptr) throw InvalidArgument("etsu plan needs random-walk sources");
  double p_e = 0.0;
  for (const auto& n : nodes) p_e += n.p_e;
  meanfield::PlanInput in;
  in.lambda = walk->q_up;
  in.mu = walk->q_down;
  in.nu = nu;
  in.n = static_cast<double>(nodes.size());
  in.slot_ratio = slot_ratio;
  in.f = nodes.front().f;
  in.p_e = p_e / static_cast<double>(nodes.size());
  return meanfield::plan(in);
}

}  // namespace s2
