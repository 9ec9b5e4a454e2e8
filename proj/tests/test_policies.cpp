#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "s2/policies.hpp"
#include "s2/sim.hpp"

using namespace s2;

namespace {

NodeState at(std::int64_t d) {
  NodeState s;
  s.s = d;
  s.refresh();
  return s;
}

bool transmits(const Action& a, int node) {
  return std::find(a.transmit.begin(), a.transmit.end(), node) != a.transmit.end();
}

}  // namespace

TEST_CASE("policy names round-trip") {
  for (auto k : {PolicyKind::optimal_two_state, PolicyKind::centralized_whittle, PolicyKind::etsu,
                 PolicyKind::separate_aoi, PolicyKind::aoi_error_index, PolicyKind::max_difference,
                 PolicyKind::round_robin, PolicyKind::random})
    CHECK(parse_policy_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_policy_kind("fastest"), InvalidArgument);
  CHECK(information_model(PolicyKind::etsu) == InformationModel::decentralized);
  CHECK(information_model(PolicyKind::optimal_two_state) == InformationModel::genie);
  CHECK(information_model(PolicyKind::centralized_whittle) == InformationModel::centralized);
}

TEST_CASE("centralized index picks the larger unreliable index") {
  std::vector<NodeParams> nodes(2);
  nodes[0].f = ErrorFunction::linear();
  nodes[1].f = ErrorFunction::exponential();
  Policy pol({PolicyKind::centralized_whittle}, nodes);
  const std::vector<NodeState> st{at(2), at(1)};
  CHECK(pol.index(0, st[0]) == doctest::Approx(4.0));
  CHECK(pol.index(1, st[1]) == doctest::Approx(std::exp(1.0) - 1.0));
  const auto a = pol.decide(st, 0, CounterRng(1));
  REQUIRE(a.transmit.size() == 1);
  CHECK(a.transmit[0] == 0);

  const std::vector<NodeState> zero{at(0), at(0)};
  CHECK(pol.decide(zero, 0, CounterRng(1)).transmit.empty());
  // ties go to the lowest id
  Policy same({PolicyKind::centralized_whittle}, std::vector<NodeParams>(3));
  const std::vector<NodeState> tie{at(1), at(3), at(3)};
  CHECK(same.decide(tie, 0, CounterRng(1)).transmit == std::vector<int>{1});
}

TEST_CASE("etsu only lets nodes at or above the index threshold contend") {
  std::vector<NodeParams> nodes(2);
  nodes[1].f = ErrorFunction::indicator(3.0);  // index 9 at d = 3
  Policy pol({PolicyKind::etsu, 0.5}, nodes, meanfield::build_mapping(10.0, 0.5));
  const std::vector<NodeState> st{at(3), at(3)};
  CHECK(pol.index(0, st[0]) == doctest::Approx(10.0));
  CHECK(pol.index(1, st[1]) == doctest::Approx(9.0));
  CHECK(pol.contention_probability(0, st[0]) == 0.5);
  CHECK(pol.contention_probability(1, st[1]) == 0.0);
  int hits = 0;
  const int rounds = 20000;
  for (int t = 0; t < rounds; ++t) {
    const auto a = pol.decide(st, t, CounterRng(3));
    CHECK_FALSE(transmits(a, 1));
    hits += transmits(a, 0);
  }
  CHECK(hits / static_cast<double>(rounds) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("etsu decisions read only the deciding node's state") {
  std::vector<NodeParams> nodes(6);
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].p_e = 0.05 * static_cast<double>(i);
  Policy pol({PolicyKind::etsu, 0.5}, nodes, meanfield::build_mapping(4.0, 0.6));
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> dist(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<NodeState> st(nodes.size());
    for (auto& s : st) s = at(dist(gen));
    const auto base = pol.decide(st, trial, CounterRng(21));
    for (std::size_t i = 0; i < st.size(); ++i) {
      // scramble every other node; node i's choice must not move
      auto other = st;
      for (std::size_t j = 0; j < other.size(); ++j)
        if (j != i) other[j] = at(dist(gen));
      const auto again = pol.decide(other, trial, CounterRng(21));
      CHECK(transmits(base, static_cast<int>(i)) == transmits(again, static_cast<int>(i)));
    }
  }
}

TEST_CASE("homogeneous nodes: centralized index and max difference agree") {
  std::vector<NodeParams> nodes(5);
  for (auto& n : nodes) n.p_e = 0.1;
  Policy whittle({PolicyKind::centralized_whittle}, nodes);
  Policy maxd({PolicyKind::max_difference}, nodes);
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> dist(0, 12);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<NodeState> st(nodes.size());
    for (auto& s : st) s = at(dist(gen));
    CHECK(whittle.decide(st, trial, CounterRng(1)).transmit == maxd.decide(st, trial, CounterRng(1)).transmit);
  }
  // and on full sample paths
  sim::SimConfig c;
  c.nodes = nodes;
  c.horizon = 20000;
  c.seed = 9;
  c.policy.kind = PolicyKind::centralized_whittle;
  const auto a = sim::run(c);
  c.policy.kind = PolicyKind::max_difference;
  const auto b = sim::run(c);
  CHECK(a.avg_weighted_error == b.avg_weighted_error);
  CHECK(a.successes == b.successes);
  CHECK(a.node_error == b.node_error);
}

TEST_CASE("separate baseline skips nodes with an empty buffer") {
  std::vector<NodeParams> nodes(2);
  nodes[0].source = TwoStateSource::make(0.5);
  nodes[1].source = TwoStateSource::make(0.5);
  Policy pol({PolicyKind::separate_aoi}, nodes);
  std::vector<NodeState> st(2);
  st[0].h = 50;  // stale but nothing buffered
  st[1].h = 2;
  st[1].a = 1;
  st[1].has_packet = true;
  const auto a = pol.decide(st, 0, CounterRng(1));
  CHECK(a.transmit == std::vector<int>{1});
  st[1].has_packet = false;
  CHECK(pol.decide(st, 0, CounterRng(1)).transmit.empty());
}

TEST_CASE("baseline schedulers") {
  Policy rr({PolicyKind::round_robin}, std::vector<NodeParams>(4));
  std::vector<NodeState> st(4);
  CHECK(rr.decide(st, 6, CounterRng(1)).transmit == std::vector<int>{2});
  Policy rnd({PolicyKind::random}, std::vector<NodeParams>(4));
  std::vector<int> seen(4, 0);
  for (int t = 0; t < 4000; ++t) seen[rnd.decide(st, t, CounterRng(2)).transmit.at(0)]++;
  for (int c : seen) CHECK(c > 850);
}

TEST_CASE("feedback") {
  NodeState s;
  s.s = 5;
  s.s_hat = 1;
  s.refresh();
  s.h = 9;
  s.has_packet = true;
  s.a = 2;
  on_feedback(s, Outcome::nack, 4, 2);
  CHECK(s.s_hat == 1);
  CHECK(s.d == 4);
  on_feedback(s, Outcome::idle, 4, 2);
  CHECK(s.s_hat == 1);
  on_feedback(s, Outcome::ack, 4, 2);
  CHECK(s.s_hat == 4);
  CHECK(s.d == 1);
  CHECK(s.h == 2);
  CHECK_FALSE(s.has_packet);
}
