#pragma once

#include <Eigen/Core>

#include "pbrl/duel.hpp"
#include "pbrl/features.hpp"
#include "pbrl/mdp.hpp"
#include "pbrl/rng.hpp"

namespace pbrl {

// Numerically stable two-sided logistic link; sigmoid(x) + sigmoid(-x) == 1
// exactly in double arithmetic.
double sigmoid(double x);

double sigmoid_derivative(double x);

// Worst-case inverse slope of the link over scores bounded by
// param_bound * feature_bound. Throws std::overflow_error past 700.
double kappa(double feature_bound, double param_bound);

// Ground-truth preference parameter. Hidden from learners by construction:
// learner modules only receive a DuelOracle.
struct PreferenceModel {
  Eigen::VectorXd w_star;
  double param_bound = 0.0;  // known norm bound on w_star
};

void validate_preference_model(const PreferenceModel& model);

double trajectory_score(const PreferenceModel& model, const FeatureMap& map, const Trajectory& traj);

double policy_score(const PreferenceModel& model, const FeatureMap& map, const Mdp& mdp,
                    const Policy& policy, std::int64_t cap = kDefaultEnumerationCap);

// Win probability of traj_one over traj_two.
double preference_prob(const PreferenceModel& model, const FeatureMap& map,
                       const Trajectory& traj_one, const Trajectory& traj_two);

// One Bernoulli preference bit; 1 means traj_one preferred.
int sample_preference(Rng& rng, const PreferenceModel& model, const FeatureMap& map,
                      const Trajectory& traj_one, const Trajectory& traj_two);

DuelOracle make_duel_oracle(PreferenceModel model, FeatureMap map);

}  // namespace pbrl
