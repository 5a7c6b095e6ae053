#include "pbrl/preference.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace pbrl {

double sigmoid(double x) {
  const double e = std::exp(-std::abs(x));
  const double p = 1.0 / (1.0 + e);
  return std::signbit(x) ? 1.0 - p : p;
}

double sigmoid_derivative(double x) {
  // sigma(x) * sigma(-x), with the small factor computed directly so it keeps
  // full precision far in the tails.
  const double e = std::exp(-std::abs(x));
  const double big = 1.0 / (1.0 + e);
  const double small = e / (1.0 + e);
  return big * small;
}

double kappa(double feature_bound, double param_bound) {
  if (feature_bound < 0.0 || param_bound < 0.0) {
    throw std::invalid_argument("kappa: bounds must be nonnegative");
  }
  const double c = feature_bound * param_bound;
  if (c > 700.0) {
    throw std::overflow_error("kappa: param_bound * feature_bound beyond 700 overflows");
  }
  // The inverse slope is even in the score and increasing in |score|, so the
  // supremum sits at the boundary |score| = S*B.
  return 1.0 / sigmoid_derivative(c);
}

void validate_preference_model(const PreferenceModel& model) {
  if (!(model.param_bound > 0.0)) {
    throw std::invalid_argument("preference model: param_bound must be positive");
  }
  if (!model.w_star.allFinite()) {
    throw std::invalid_argument("preference model: non-finite parameter");
  }
  if (model.w_star.norm() > model.param_bound + 1e-12) {
    throw std::invalid_argument("preference model: parameter norm exceeds its bound");
  }
}

double trajectory_score(const PreferenceModel& model, const FeatureMap& map,
                        const Trajectory& traj) {
  if (model.w_star.size() != map.dim()) {
    throw std::invalid_argument("trajectory score: dimension mismatch");
  }
  return trajectory_features(map, traj).dot(model.w_star);
}

double policy_score(const PreferenceModel& model, const FeatureMap& map, const Mdp& mdp,
                    const Policy& policy, std::int64_t cap) {
  if (model.w_star.size() != map.dim()) {
    throw std::invalid_argument("policy score: dimension mismatch");
  }
  return policy_features(map, mdp, policy, cap).dot(model.w_star);
}

double preference_prob(const PreferenceModel& model, const FeatureMap& map,
                       const Trajectory& traj_one, const Trajectory& traj_two) {
  if (model.w_star.size() != map.dim()) {
    throw std::invalid_argument("preference prob: dimension mismatch");
  }
  const Eigen::VectorXd diff = trajectory_features(map, traj_one) - trajectory_features(map, traj_two);
  return sigmoid(diff.dot(model.w_star));
}

int sample_preference(Rng& rng, const PreferenceModel& model, const FeatureMap& map,
                      const Trajectory& traj_one, const Trajectory& traj_two) {
  return rng.bernoulli(preference_prob(model, map, traj_one, traj_two));
}

DuelOracle make_duel_oracle(PreferenceModel model, FeatureMap map) {
  return [model = std::move(model), map = std::move(map)](const Trajectory& a, const Trajectory& b,
                                                          Rng& rng) {
    return sample_preference(rng, model, map, a, b);
  };
}

}  // namespace pbrl
