#pragma once

// Seeded instance generators shared by the unit and acceptance suites.

#include <Eigen/Core>
#include <set>
#include <vector>

#include "pbrl/features.hpp"
#include "pbrl/mdp.hpp"
#include "pbrl/rng.hpp"

namespace pbrl::testing {

inline Eigen::VectorXd random_distribution(Rng& rng, int n, double min_mass) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = min_mass + rng.next_double();
  return v / v.sum();
}

inline Mdp make_random_mdp(Rng& rng, int num_states, int num_actions, int horizon,
                           double min_mass = 0.1) {
  Mdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.horizon = horizon;
  mdp.initial_dist = random_distribution(rng, num_states, min_mass);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      mdp.transition.push_back(random_distribution(rng, num_states, min_mass));
    }
  }
  return mdp;
}

inline Eigen::VectorXd random_unit_vector(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.next_double() - 0.5;
  const double n = v.norm();
  if (n < 1e-9) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / n;
}

inline FeatureMap make_random_decomposed_map(Rng& rng, const Mdp& mdp, int dim,
                                             double per_step_norm_cap = 1.0) {
  std::vector<std::vector<Eigen::VectorXd>> table(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      const double scale = per_step_norm_cap * rng.next_double();
      table[s].push_back(scale * random_unit_vector(rng, dim));
    }
  }
  return FeatureMap::decomposed(dim, std::move(table));
}

inline Policy make_random_markov_policy(Rng& rng, const Mdp& mdp) {
  std::vector<int> rule(static_cast<std::size_t>(mdp.horizon) * mdp.num_states);
  for (auto& a : rule) a = rng.uniform_int(mdp.num_actions);
  return make_markov_policy(std::move(rule));
}

inline PolicyClass make_random_policy_class(Rng& rng, const Mdp& mdp, int count) {
  PolicyClass pc;
  std::set<std::vector<int>> seen;
  while (static_cast<int>(pc.policies.size()) < count) {
    Policy p = make_random_markov_policy(rng, mdp);
    if (seen.insert(p.markov).second) pc.policies.push_back(std::move(p));
  }
  return pc;
}

}  // namespace pbrl::testing
