#include "pbrl/mdp.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pbrl {

namespace {

constexpr double kRowTol = 1e-12;

void check_distribution(const Eigen::VectorXd& row, int expected_size, const std::string& label) {
  if (row.size() != expected_size) {
    std::ostringstream msg;
    msg << label << " has size " << row.size() << ", expected " << expected_size;
    throw std::invalid_argument(msg.str());
  }
  for (int i = 0; i < row.size(); ++i) {
    if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
      std::ostringstream msg;
      msg << label << " entry " << i << " is " << row[i];
      throw std::invalid_argument(msg.str());
    }
  }
  const double sum = row.sum();
  if (std::abs(sum - 1.0) > kRowTol) {
    std::ostringstream msg;
    msg << label << " sum " << sum << " (residual " << sum - 1.0 << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

void validate_mdp(const Mdp& mdp) {
  if (mdp.num_states < 1) throw std::invalid_argument("mdp: need at least one state");
  if (mdp.num_actions < 1) throw std::invalid_argument("mdp: need at least one action");
  if (mdp.horizon < 1) throw std::invalid_argument("mdp: horizon must be >= 1");
  check_distribution(mdp.initial_dist, mdp.num_states, "initial distribution");
  const std::size_t expected = static_cast<std::size_t>(mdp.num_states) * mdp.num_actions;
  if (mdp.transition.size() != expected) {
    throw std::invalid_argument("mdp: transition table size mismatch");
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      std::ostringstream label;
      label << "transition row (s=" << s << ", a=" << a << ")";
      check_distribution(mdp.row(s, a), mdp.num_states, label.str());
    }
  }
}

std::vector<int> flatten(const Trajectory& traj) {
  std::vector<int> out;
  out.reserve(traj.steps.size() * 2);
  for (const auto& [s, a] : traj.steps) {
    out.push_back(s);
    out.push_back(a);
  }
  return out;
}

int Policy::decide(int h, const std::vector<int>& prefix, int num_states) const {
  if (kind == Kind::kMarkovDeterministic) {
    return markov_action(h, prefix.back(), num_states);
  }
  const auto it = history.find(prefix);
  if (it == history.end()) {
    throw std::runtime_error("history policy undefined for an observed prefix");
  }
  return it->second;
}

Policy make_markov_policy(std::vector<int> rule) {
  Policy p;
  p.kind = Policy::Kind::kMarkovDeterministic;
  p.markov = std::move(rule);
  return p;
}

void validate_policy_class(const PolicyClass& pc, const Mdp& mdp) {
  if (pc.policies.empty()) throw std::invalid_argument("policy class: empty");
  for (std::size_t k = 0; k < pc.policies.size(); ++k) {
    const Policy& p = pc.policies[k];
    if (p.kind == Policy::Kind::kMarkovDeterministic) {
      const std::size_t expected = static_cast<std::size_t>(mdp.horizon) * mdp.num_states;
      if (p.markov.size() != expected) {
        std::ostringstream msg;
        msg << "policy " << k << ": markov rule size " << p.markov.size() << ", expected "
            << expected;
        throw std::invalid_argument(msg.str());
      }
      for (int action : p.markov) {
        if (action < 0 || action >= mdp.num_actions) {
          std::ostringstream msg;
          msg << "policy " << k << ": action " << action << " out of range";
          throw std::invalid_argument(msg.str());
        }
      }
    } else {
      for (const auto& [prefix, action] : p.history) {
        if (prefix.empty() || prefix.size() % 2 != 1) {
          throw std::invalid_argument("history policy: malformed prefix key");
        }
        if (action < 0 || action >= mdp.num_actions) {
          throw std::invalid_argument("history policy: action out of range");
        }
      }
      // Totality on reachable prefixes: the walk throws on a missing entry.
      (void)enumerate_trajectories(mdp, p);
    }
  }
  for (std::size_t i = 0; i < pc.policies.size(); ++i) {
    for (std::size_t j = i + 1; j < pc.policies.size(); ++j) {
      if (pc.policies[i] == pc.policies[j]) {
        std::ostringstream msg;
        msg << "policy class: policies " << i << " and " << j << " share a decision rule";
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

Trajectory sample_trajectory(const Mdp& mdp, const Policy& policy, Rng& rng) {
  Trajectory traj;
  traj.steps.reserve(mdp.horizon);
  std::vector<int> prefix;
  prefix.reserve(2 * mdp.horizon);
  int s = rng.categorical({mdp.initial_dist.data(), static_cast<std::size_t>(mdp.initial_dist.size())});
  for (int h = 0; h < mdp.horizon; ++h) {
    prefix.push_back(s);
    const int a = policy.decide(h, prefix, mdp.num_states);
    prefix.push_back(a);
    traj.steps.emplace_back(s, a);
    if (h + 1 < mdp.horizon) {
      const Eigen::VectorXd& row = mdp.row(s, a);
      s = rng.categorical({row.data(), static_cast<std::size_t>(row.size())});
    }
  }
  return traj;
}

std::vector<Eigen::MatrixXd> occupancy_measures(const Mdp& mdp,
                                                const std::vector<Eigen::VectorXd>& model,
                                                const Policy& policy) {
  if (policy.kind != Policy::Kind::kMarkovDeterministic) {
    throw std::invalid_argument("occupancy measures need a markov policy; enumeration required");
  }
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  std::vector<Eigen::MatrixXd> occ(mdp.horizon, Eigen::MatrixXd::Zero(S, A));
  Eigen::VectorXd state_dist = mdp.initial_dist;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < S; ++s) {
      occ[h](s, policy.markov_action(h, s, S)) = state_dist[s];
    }
    if (h + 1 < mdp.horizon) {
      Eigen::VectorXd next = Eigen::VectorXd::Zero(S);
      for (int s = 0; s < S; ++s) {
        if (state_dist[s] == 0.0) continue;
        const int a = policy.markov_action(h, s, S);
        next += state_dist[s] * model[static_cast<std::size_t>(s) * A + a];
      }
      state_dist = next;
    }
  }
  return occ;
}

std::vector<Eigen::MatrixXd> occupancy_measures(const Mdp& mdp, const Policy& policy) {
  return occupancy_measures(mdp, mdp.transition, policy);
}

namespace {

void enumerate_recurse(const Mdp& mdp, const std::vector<Eigen::VectorXd>& model,
                       const Policy& policy, int h, int state, double prob,
                       std::vector<int>& prefix, Trajectory& current,
                       std::vector<WeightedTrajectory>& out) {
  prefix.push_back(state);
  const int a = policy.decide(h, prefix, mdp.num_states);
  prefix.push_back(a);
  current.steps.emplace_back(state, a);
  if (h + 1 == mdp.horizon) {
    out.push_back({current, prob});
  } else {
    const Eigen::VectorXd& row = model[static_cast<std::size_t>(state) * mdp.num_actions + a];
    for (int sp = 0; sp < mdp.num_states; ++sp) {
      if (row[sp] <= 0.0) continue;
      enumerate_recurse(mdp, model, policy, h + 1, sp, prob * row[sp], prefix, current, out);
    }
  }
  current.steps.pop_back();
  prefix.pop_back();
  prefix.pop_back();
}

}  // namespace

std::vector<WeightedTrajectory> enumerate_trajectories(const Mdp& mdp,
                                                       const std::vector<Eigen::VectorXd>& model,
                                                       const Policy& policy, std::int64_t cap) {
  double worst_case = 1.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    worst_case *= static_cast<double>(mdp.num_states) * mdp.num_actions;
    if (worst_case > static_cast<double>(cap)) {
      std::ostringstream msg;
      msg << "trajectory enumeration: (|S||A|)^H exceeds cap " << cap;
      throw std::length_error(msg.str());
    }
  }
  std::vector<WeightedTrajectory> out;
  std::vector<int> prefix;
  Trajectory current;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.initial_dist[s] <= 0.0) continue;
    enumerate_recurse(mdp, model, policy, 0, s, mdp.initial_dist[s], prefix, current, out);
  }
  return out;
}

std::vector<WeightedTrajectory> enumerate_trajectories(const Mdp& mdp, const Policy& policy,
                                                       std::int64_t cap) {
  return enumerate_trajectories(mdp, mdp.transition, policy, cap);
}

}  // namespace pbrl
