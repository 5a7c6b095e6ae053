#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "pbrl/rng.hpp"

namespace pbrl {

// Tabular episodic MDP: initial distribution, one transition row per (s,a),
// fixed horizon. States and actions are dense integer indices; labels, if
// any, live in the experiment config.
struct Mdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  Eigen::VectorXd initial_dist;             // size num_states
  std::vector<Eigen::VectorXd> transition;  // index s*num_actions + a, row over s'

  const Eigen::VectorXd& row(int s, int a) const {
    return transition[static_cast<std::size_t>(s) * num_actions + a];
  }
};

// Throws std::invalid_argument naming the first violated row and its residual.
void validate_mdp(const Mdp& mdp);

struct Trajectory {
  std::vector<std::pair<int, int>> steps;  // exactly horizon (state, action) pairs
  bool operator==(const Trajectory&) const = default;
};

// Flattened (s1,a1,...,sH,aH); the lookup key used by tabular feature maps.
std::vector<int> flatten(const Trajectory& traj);

struct Policy {
  enum class Kind { kMarkovDeterministic, kHistoryDependent };
  Kind kind = Kind::kMarkovDeterministic;

  // Markov rule: action = markov[h * num_states + s] for step h in [0, H).
  std::vector<int> markov;

  // History rule keyed by the observed prefix [s1,a1,...,s_{h-1},a_{h-1},s_h].
  // Explicit finite table; only viable for tiny instances.
  std::map<std::vector<int>, int> history;

  int markov_action(int h, int s, int num_states) const {
    return markov[static_cast<std::size_t>(h) * num_states + s];
  }

  // Action for step h given the flattened prefix ending in the current state.
  int decide(int h, const std::vector<int>& prefix, int num_states) const;

  bool operator==(const Policy&) const = default;
};

Policy make_markov_policy(std::vector<int> rule);

// Explicit finite policy class; the regret reference set.
struct PolicyClass {
  std::vector<Policy> policies;
};

// Checks totality of every rule and rejects duplicate decision rules.
void validate_policy_class(const PolicyClass& pc, const Mdp& mdp);

Trajectory sample_trajectory(const Mdp& mdp, const Policy& policy, Rng& rng);

inline constexpr std::int64_t kDefaultEnumerationCap = 1'000'000;

// Exact per-step occupancy d_h(s,a); markov policies only (H matrices, each
// num_states x num_actions, each summing to 1). The second overload swaps in
// an arbitrary transition model in place of mdp.transition.
std::vector<Eigen::MatrixXd> occupancy_measures(const Mdp& mdp, const Policy& policy);
std::vector<Eigen::MatrixXd> occupancy_measures(const Mdp& mdp,
                                                const std::vector<Eigen::VectorXd>& model,
                                                const Policy& policy);

struct WeightedTrajectory {
  Trajectory trajectory;
  double probability = 0.0;
};

// All positive-probability trajectories of a policy with their probabilities.
// Preconditions: (|S|*|A|)^H <= cap. Works for history-dependent policies.
std::vector<WeightedTrajectory> enumerate_trajectories(const Mdp& mdp, const Policy& policy,
                                                       std::int64_t cap = kDefaultEnumerationCap);
std::vector<WeightedTrajectory> enumerate_trajectories(const Mdp& mdp,
                                                       const std::vector<Eigen::VectorXd>& model,
                                                       const Policy& policy,
                                                       std::int64_t cap = kDefaultEnumerationCap);

}  // namespace pbrl
