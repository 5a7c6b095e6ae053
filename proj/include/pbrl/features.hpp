#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

#include "pbrl/mdp.hpp"

namespace pbrl {

// Trajectory embedding. Decomposed maps store one vector per (s,a) and embed
// a trajectory as the sum of its per-step vectors; tabular maps store one
// vector per trajectory and must cover every trajectory the instance can
// produce.
class FeatureMap {
 public:
  enum class Kind { kDecomposed, kTabular };

  static FeatureMap decomposed(int dim, std::vector<std::vector<Eigen::VectorXd>> per_state_action);
  static FeatureMap tabular(int dim, std::map<std::vector<int>, Eigen::VectorXd> per_trajectory);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  const Eigen::VectorXd& per_step(int s, int a) const { return sa_table_[s][a]; }
  const std::map<std::vector<int>, Eigen::VectorXd>& table() const { return trajectory_table_; }

 private:
  FeatureMap() = default;
  Kind kind_ = Kind::kDecomposed;
  int dim_ = 0;
  std::vector<std::vector<Eigen::VectorXd>> sa_table_;           // [s][a] -> R^d
  std::map<std::vector<int>, Eigen::VectorXd> trajectory_table_; // flatten(traj) -> R^d
};

// Known upper bound on the trajectory feature norm.
struct FeatureBound {
  double value = 0.0;
};

Eigen::VectorXd trajectory_features(const FeatureMap& map, const Trajectory& traj);

// Expected trajectory features of a policy. Decomposed maps with markov
// policies go through exact occupancies; everything else enumerates.
Eigen::VectorXd policy_features(const FeatureMap& map, const Mdp& mdp, const Policy& policy,
                                std::int64_t cap = kDefaultEnumerationCap);

// Same computation with the transition table replaced by an arbitrary model.
Eigen::VectorXd policy_features_in_model(const FeatureMap& map, const Mdp& mdp,
                                         const std::vector<Eigen::VectorXd>& model,
                                         const Policy& policy,
                                         std::int64_t cap = kDefaultEnumerationCap);

// Tabular: exact max norm over the table. Decomposed: H * max per-step norm,
// which may be loose but never undershoots.
FeatureBound feature_bound(const FeatureMap& map, const Mdp& mdp);

// Verifies a tabular table has an entry for every producible trajectory.
void validate_tabular_coverage(const FeatureMap& map, const Mdp& mdp,
                               std::int64_t cap = kDefaultEnumerationCap);

}  // namespace pbrl
