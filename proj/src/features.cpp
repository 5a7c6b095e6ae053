#include "pbrl/features.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pbrl {

FeatureMap FeatureMap::decomposed(int dim, std::vector<std::vector<Eigen::VectorXd>> per_state_action) {
  FeatureMap map;
  map.kind_ = Kind::kDecomposed;
  map.dim_ = dim;
  for (const auto& row : per_state_action) {
    for (const auto& vec : row) {
      if (vec.size() != dim || !vec.allFinite()) {
        throw std::invalid_argument("feature map: per-(s,a) vector has wrong size or non-finite entries");
      }
    }
  }
  map.sa_table_ = std::move(per_state_action);
  return map;
}

FeatureMap FeatureMap::tabular(int dim, std::map<std::vector<int>, Eigen::VectorXd> per_trajectory) {
  FeatureMap map;
  map.kind_ = Kind::kTabular;
  map.dim_ = dim;
  for (const auto& [key, vec] : per_trajectory) {
    if (vec.size() != dim || !vec.allFinite()) {
      throw std::invalid_argument("feature map: trajectory vector has wrong size or non-finite entries");
    }
    if (key.empty() || key.size() % 2 != 0) {
      throw std::invalid_argument("feature map: malformed trajectory key");
    }
  }
  map.trajectory_table_ = std::move(per_trajectory);
  return map;
}

Eigen::VectorXd trajectory_features(const FeatureMap& map, const Trajectory& traj) {
  if (map.kind() == FeatureMap::Kind::kDecomposed) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(map.dim());
    for (const auto& [s, a] : traj.steps) out += map.per_step(s, a);
    return out;
  }
  const auto it = map.table().find(flatten(traj));
  if (it == map.table().end()) {
    throw std::runtime_error("tabular feature map: no entry for an observed trajectory");
  }
  return it->second;
}

namespace {

Eigen::VectorXd features_via_occupancy(const FeatureMap& map, const Mdp& mdp,
                                       const std::vector<Eigen::VectorXd>& model,
                                       const Policy& policy) {
  const auto occ = occupancy_measures(mdp, model, policy);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(map.dim());
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        const double w = occ[h](s, a);
        if (w != 0.0) out += w * map.per_step(s, a);
      }
    }
  }
  return out;
}

Eigen::VectorXd features_via_enumeration(const FeatureMap& map, const Mdp& mdp,
                                         const std::vector<Eigen::VectorXd>& model,
                                         const Policy& policy, std::int64_t cap) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(map.dim());
  for (const auto& wt : enumerate_trajectories(mdp, model, policy, cap)) {
    out += wt.probability * trajectory_features(map, wt.trajectory);
  }
  return out;
}

}  // namespace

Eigen::VectorXd policy_features_in_model(const FeatureMap& map, const Mdp& mdp,
                                         const std::vector<Eigen::VectorXd>& model,
                                         const Policy& policy, std::int64_t cap) {
  if (map.kind() == FeatureMap::Kind::kDecomposed &&
      policy.kind == Policy::Kind::kMarkovDeterministic) {
    return features_via_occupancy(map, mdp, model, policy);
  }
  return features_via_enumeration(map, mdp, model, policy, cap);
}

Eigen::VectorXd policy_features(const FeatureMap& map, const Mdp& mdp, const Policy& policy,
                                std::int64_t cap) {
  return policy_features_in_model(map, mdp, mdp.transition, policy, cap);
}

FeatureBound feature_bound(const FeatureMap& map, const Mdp& mdp) {
  if (map.kind() == FeatureMap::Kind::kTabular) {
    double best = 0.0;
    for (const auto& [key, vec] : map.table()) best = std::max(best, vec.norm());
    return {best};
  }
  double best = 0.0;
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      best = std::max(best, map.per_step(s, a).norm());
    }
  }
  return {mdp.horizon * best};
}

void validate_tabular_coverage(const FeatureMap& map, const Mdp& mdp, std::int64_t cap) {
  if (map.kind() != FeatureMap::Kind::kTabular) return;
  // Walks the support of every action choice at every reachable state; an
  // entry must exist for each leaf.
  double worst_case = 1.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    worst_case *= static_cast<double>(mdp.num_states) * mdp.num_actions;
    if (worst_case > static_cast<double>(cap)) {
      throw std::length_error("tabular coverage check: (|S||A|)^H exceeds cap");
    }
  }
  std::vector<std::vector<int>> frontier;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.initial_dist[s] > 0.0) frontier.push_back({s});
  }
  for (int h = 0; h < mdp.horizon; ++h) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : frontier) {
      const int s = prefix.back();
      for (int a = 0; a < mdp.num_actions; ++a) {
        std::vector<int> extended = prefix;
        extended.push_back(a);
        if (h + 1 == mdp.horizon) {
          if (map.table().find(extended) == map.table().end()) {
            std::ostringstream msg;
            msg << "tabular feature map: missing entry for a producible trajectory (first state "
                << extended[0] << ")";
            throw std::invalid_argument(msg.str());
          }
        } else {
          const Eigen::VectorXd& row = mdp.row(s, a);
          for (int sp = 0; sp < mdp.num_states; ++sp) {
            if (row[sp] <= 0.0) continue;
            std::vector<int> child = extended;
            child.push_back(sp);
            next.push_back(std::move(child));
          }
        }
      }
    }
    frontier = std::move(next);
  }
}

}  // namespace pbrl
