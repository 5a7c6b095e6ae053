#include "pbrl/known_model.hpp"

#include <cmath>
#include <stdexcept>

namespace pbrl {

void validate_known_config(const KnownModelConfig& cfg) {
  if (cfg.dim < 1) throw std::invalid_argument("config: dim must be positive");
  if (cfg.rounds < 0) throw std::invalid_argument("config: rounds must be nonnegative");
  if (!(cfg.param_bound > 0.0)) throw std::invalid_argument("config: param_bound must be positive");
  if (!(cfg.feature_bound >= 0.0)) throw std::invalid_argument("config: feature_bound must be nonnegative");
  if (!(cfg.kappa > 0.0)) throw std::invalid_argument("config: kappa must be positive");
  if (!(cfg.delta > 0.0) || cfg.delta > std::exp(-1.0) + 1e-15) {
    throw std::invalid_argument("config: delta must lie in (0, 1/e]");
  }
  if (cfg.lambda < cfg.feature_bound / cfg.kappa - 1e-12) {
    throw std::invalid_argument("config: lambda must be at least feature_bound / kappa");
  }
}

double expected_feature_margin(int dim, int rounds, double delta, double feature_bound,
                               double param_bound) {
  const double t = static_cast<double>(rounds);
  return 20.0 * feature_bound * param_bound * std::sqrt(dim * std::log(t * (1.0 + 2.0 * t) / delta));
}

std::vector<int> candidate_set(const std::vector<Eigen::VectorXd>& feats,
                               const Eigen::VectorXd& w, const DataMatrix& vbar,
                               double threshold) {
  const int n = static_cast<int>(feats.size());
  std::vector<double> score(n);
  for (int i = 0; i < n; ++i) score[i] = feats[i].dot(w);
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    bool member = true;
    for (int j = 0; j < n && member; ++j) {
      if (j == i) continue;
      const double width = std::sqrt(vbar.quad_inv(feats[i] - feats[j]));
      if (score[i] - score[j] + threshold * width < 0.0) member = false;
    }
    if (member) out.push_back(i);
  }
  return out;
}

std::pair<int, int> select_pair(const std::vector<int>& candidates,
                                const std::vector<Eigen::VectorXd>& feats,
                                const DataMatrix& vbar) {
  if (candidates.empty()) {
    throw std::logic_error("pair selection: empty candidate set");
  }
  int best_i = candidates.front();
  int best_j = candidates.front();
  double best = -1.0;
  for (int i : candidates) {
    for (int j : candidates) {
      const double q = vbar.quad_inv(feats[i] - feats[j]);
      if (q > best) {
        best = q;
        best_i = i;
        best_j = j;
      }
    }
  }
  return {best_i, best_j};
}

KnownModelRunner::KnownModelRunner(KnownModelConfig cfg, const Mdp& mdp, const FeatureMap& map,
                                   const PolicyClass& policies)
    : cfg_(cfg),
      mdp_(mdp),
      map_(map),
      policies_(policies),
      v_(cfg.dim, cfg.kappa * cfg.lambda),
      vbar_(cfg.dim, cfg.kappa * cfg.lambda),
      data_(cfg.dim, 2.0 * cfg.feature_bound) {
  validate_known_config(cfg_);
  margin_ = expected_feature_margin(cfg_.dim, cfg_.rounds, cfg_.delta, cfg_.feature_bound,
                                    cfg_.param_bound);
  feats_.reserve(policies.policies.size());
  for (const Policy& p : policies.policies) {
    feats_.push_back(policy_features(map, mdp, p));
  }
  estimate_.w_mle = Eigen::VectorXd::Zero(cfg_.dim);
  estimate_.w_proj = Eigen::VectorXd::Zero(cfg_.dim);
  estimate_.lambda = cfg_.lambda;
  estimate_.param_bound = cfg_.param_bound;
}

RoundRecord KnownModelRunner::step(const DuelOracle& oracle, Rng& rng) {
  const int t = t_;
  estimate_ = fit_estimate(data_, v_, cfg_.lambda, cfg_.param_bound, &estimate_.w_mle);
  const double radius = confidence_radius(t, cfg_.delta, cfg_.lambda, cfg_.param_bound,
                                          cfg_.feature_bound, cfg_.dim, cfg_.kappa);
  const double threshold = 2.0 * cfg_.kappa * radius + margin_;
  const std::vector<int> cands = candidate_set(feats_, estimate_.w_proj, vbar_, threshold);
  const auto [i, j] = select_pair(cands, feats_, vbar_);

  RoundRecord rec;
  rec.t = t;
  rec.policy_one = i;
  rec.policy_two = j;
  rec.radius = radius;
  rec.set_size = static_cast<int>(cands.size());
  rec.candidate_set = cands;
  rec.traj_one = sample_trajectory(mdp_, policies_.policies[i], rng);
  rec.traj_two = sample_trajectory(mdp_, policies_.policies[j], rng);
  rec.outcome = oracle(rec.traj_one, rec.traj_two, rng);

  const Eigen::VectorXd z =
      trajectory_features(map_, rec.traj_one) - trajectory_features(map_, rec.traj_two);
  data_.append(z, rec.outcome);
  v_.add_outer(z);
  v_log_.push_back(z);
  const Eigen::VectorXd u = feats_[i] - feats_[j];
  vbar_.add_outer(u);
  vbar_log_.push_back(u);
  ++t_;
  return rec;
}

}  // namespace pbrl
