#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s2/domain.hpp"
#include "s2/indices.hpp"
#include "s2/meanfield.hpp"
#include "s2/rng.hpp"

namespace s2 {

enum class PolicyKind {
  optimal_two_state,
  centralized_whittle,
  etsu,
  separate_aoi,
  aoi_error_index,
  max_difference,
  round_robin,
  random,
};

/// What a policy may look at. Genie and centralized schedulers read the whole
/// network; decentralized nodes read only their own NodeState.
enum class InformationModel { genie, centralized, decentralized };

InformationModel information_model(PolicyKind kind);
std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& name);  // throws InvalidArgument

struct PolicySpec {
  PolicyKind kind = PolicyKind::centralized_whittle;
  double nu = 0.1;  // etsu: fraction of nodes allowed to contend
};

struct NodeParams {
  SourceModel source = RandomWalkSource::symmetric();
  ErrorFunction f = ErrorFunction::linear();
  double p_e = 0.0;
};

enum class Outcome { ack, nack, idle };

struct Action {
  std::vector<int> transmit;  // node ids attempting this slot
};

/// Applies the sink's feedback to a node. On ACK the tracked status becomes
/// the delivered one and the AoI drops to the packet's age; it reaches
/// age + 1 at the next slot boundary. NACK and idle change nothing.
void on_feedback(NodeState& node, Outcome outcome, Status delivered, std::int64_t packet_age);

class Policy {
 public:
  /// ETSU needs a mapping; pass one explicitly or use etsu_mapping() to
  /// derive it from the mean-field plan.
  Policy(PolicySpec spec, std::vector<NodeParams> nodes,
         std::optional<meanfield::Mapping> mapping = std::nullopt);

  PolicyKind kind() const { return spec_.kind; }
  InformationModel information() const { return information_model(spec_.kind); }
  const PolicySpec& spec() const { return spec_; }
  std::size_t size() const { return nodes_.size(); }

  /// Transmit set for slot t. Centralized kinds return at most one node.
  /// For etsu each node draws independently against its own probability
  /// (one Bernoulli contention round).
  Action decide(std::span<const NodeState> states, std::int64_t t, const CounterRng& rng);

  /// Psi(I_n) for an etsu node, computed from its own state only.
  double contention_probability(std::size_t node, const NodeState& own);

  /// Priority the kind assigns to one node (etsu and the centralized index
  /// kinds use the unreliable-channel Whittle index).
  double index(std::size_t node, const NodeState& own);

  const meanfield::Mapping& mapping() const;

 private:
  int argmax_index(std::span<const NodeState> states, bool need_packet);

  PolicySpec spec_;
  std::vector<NodeParams> nodes_;
  std::vector<WhittleTable> tables_;
  std::vector<double> flip_p_;  // two-state flip probabilities, empty otherwise
  std::optional<meanfield::Mapping> mapping_;
};

/// Mean-field operating point for an etsu population. Uses lambda = q_up,
/// mu = q_down of the first node, its error function, and the mean p_e.
meanfield::MeanFieldSolution etsu_plan(std::span<const NodeParams> nodes, double nu,
                                       double slot_ratio);

}  // namespace s2
