#include "pbrl/unknown_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pbrl/known_model.hpp"

namespace pbrl {

VisitCounts::VisitCounts(int num_states_, int num_actions_)
    : num_states(num_states_),
      num_actions(num_actions_),
      visits(static_cast<std::size_t>(num_states_) * num_actions_, 0),
      transitions(static_cast<std::size_t>(num_states_) * num_actions_ * num_states_, 0) {}

std::int64_t VisitCounts::row_sum(int s, int a) const {
  std::int64_t sum = 0;
  for (int sp = 0; sp < num_states; ++sp) sum += m(s, a, sp);
  return sum;
}

void VisitCounts::validate() const {
  // Visits at the final step have no observed successor, so the transition
  // row can only ever undershoot the visit count.
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      if (row_sum(s, a) > n(s, a)) {
        throw std::runtime_error("visit counts: transition row exceeds visit count");
      }
    }
  }
}

void update_counts(VisitCounts& counts, const Trajectory& traj) {
  const int H = static_cast<int>(traj.steps.size());
  for (int h = 0; h < H; ++h) {
    const auto [s, a] = traj.steps[h];
    counts.visits[static_cast<std::size_t>(s) * counts.num_actions + a] += 1;
    if (h + 1 < H) {
      const int sp = traj.steps[h + 1].first;
      counts.transitions[(static_cast<std::size_t>(s) * counts.num_actions + a) * counts.num_states +
                         sp] += 1;
    }
  }
}

std::vector<Eigen::VectorXd> empirical_model(const VisitCounts& counts) {
  const int S = counts.num_states;
  const int A = counts.num_actions;
  std::vector<Eigen::VectorXd> rows(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      Eigen::VectorXd row(S);
      const std::int64_t total = counts.row_sum(s, a);
      if (total == 0) {
        row.setConstant(1.0 / S);
      } else {
        for (int sp = 0; sp < S; ++sp) {
          row[sp] = static_cast<double>(counts.m(s, a, sp)) / static_cast<double>(total);
        }
      }
      rows[static_cast<std::size_t>(s) * A + a] = std::move(row);
    }
  }
  return rows;
}

double visit_bonus(std::int64_t n, double eta, double log_inv_delta, int horizon, int num_states,
                   int num_actions) {
  if (!(eta > 0.0)) throw std::invalid_argument("visit bonus: eta must be positive");
  if (n <= 1) return 2.0 * eta;  // no usable deviation term below two samples
  const double u = horizon * std::log(static_cast<double>(num_states) * num_actions) +
                   std::log(6.0 * std::log(static_cast<double>(n))) + log_inv_delta;
  return std::min(2.0 * eta, 4.0 * eta * std::sqrt(u / static_cast<double>(n)));
}

double uniform_visit_bonus(std::int64_t n, double eps, double eta, double log_inv_delta,
                           int horizon, int num_states, int num_actions) {
  if (!(eta > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument("uniform visit bonus: eta and eps must be positive");
  }
  if (n <= 1) return 2.0 * eta;
  const double u =
      horizon * std::log(static_cast<double>(num_states) * num_actions * horizon) +
      num_states * std::log(std::ceil(4.0 * eta * horizon / eps)) +
      std::log(6.0 * std::log(static_cast<double>(n))) + log_inv_delta;
  return std::min(2.0 * eta, 4.0 * eta * std::sqrt(u / static_cast<double>(n)));
}

double bonus_expectation(const Mdp& mdp, const std::vector<Eigen::VectorXd>& model,
                         const Policy& policy, const Eigen::MatrixXd& bonus_table,
                         std::int64_t cap) {
  if (mdp.horizon <= 1) return 0.0;
  if (policy.kind == Policy::Kind::kMarkovDeterministic) {
    const auto occ = occupancy_measures(mdp, model, policy);
    double total = 0.0;
    for (int h = 0; h + 1 < mdp.horizon; ++h) {
      total += occ[h].cwiseProduct(bonus_table).sum();
    }
    return total;
  }
  double total = 0.0;
  for (const auto& wt : enumerate_trajectories(mdp, model, policy, cap)) {
    double along = 0.0;
    for (int h = 0; h + 1 < mdp.horizon; ++h) {
      const auto [s, a] = wt.trajectory.steps[h];
      along += bonus_table(s, a);
    }
    total += wt.probability * along;
  }
  return total;
}

double combined_radius(int t, double kappa_value, double radius, double margin,
                       std::span<const std::pair<double, double>> bonus_log) {
  if (t < 1) throw std::invalid_argument("combined radius: t must be >= 1");
  double sum_sq = 0.0;
  for (const auto& [b1, b2] : bonus_log) sum_sq += b1 * b1 + b2 * b2;
  return std::numbers::sqrt2 * (4.0 * kappa_value * radius + margin) + 2.0 * std::sqrt(sum_sq) +
         1.0 / static_cast<double>(t);
}

std::vector<int> candidate_set_with_bonus(const std::vector<Eigen::VectorXd>& feats,
                                          const Eigen::VectorXd& w, const DataMatrix& vtilde,
                                          double radius_multiplier,
                                          const std::vector<double>& bonuses) {
  const int n = static_cast<int>(feats.size());
  std::vector<double> score(n);
  for (int i = 0; i < n; ++i) score[i] = feats[i].dot(w);
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    bool member = true;
    for (int j = 0; j < n && member; ++j) {
      if (j == i) continue;
      const double width = std::sqrt(vtilde.quad_inv(feats[i] - feats[j]));
      if (score[i] - score[j] + radius_multiplier * width + bonuses[i] + bonuses[j] < 0.0) {
        member = false;
      }
    }
    if (member) out.push_back(i);
  }
  return out;
}

std::pair<int, int> select_pair_with_bonus(const std::vector<int>& candidates,
                                           const std::vector<Eigen::VectorXd>& feats,
                                           const DataMatrix& vtilde, double radius_multiplier,
                                           const std::vector<double>& bonuses) {
  if (candidates.empty()) {
    throw std::logic_error("pair selection: empty candidate set");
  }
  int best_i = candidates.front();
  int best_j = candidates.front();
  double best = -std::numeric_limits<double>::infinity();
  for (int i : candidates) {
    for (int j : candidates) {
      const double width = std::sqrt(vtilde.quad_inv(feats[i] - feats[j]));
      const double objective = radius_multiplier * width + 2.0 * bonuses[i] + 2.0 * bonuses[j];
      if (objective > best) {
        best = objective;
        best_i = i;
        best_j = j;
      }
    }
  }
  return {best_i, best_j};
}

void validate_unknown_config(const UnknownModelConfig& cfg) {
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

UnknownModelRunner::UnknownModelRunner(UnknownModelConfig cfg, const Mdp& mdp,
                                       const FeatureMap& map, const PolicyClass& policies)
    : cfg_(cfg),
      mdp_(mdp),
      map_(map),
      policies_(policies),
      v_(cfg.dim, cfg.kappa * cfg.lambda),
      vtilde_(cfg.dim, cfg.kappa * cfg.lambda),
      data_(cfg.dim, 2.0 * cfg.feature_bound),
      counts_(mdp.num_states, mdp.num_actions) {
  validate_unknown_config(cfg_);
  margin_ = expected_feature_margin(cfg_.dim, cfg_.rounds, cfg_.delta, cfg_.feature_bound,
                                    cfg_.param_bound);
  estimate_.w_mle = Eigen::VectorXd::Zero(cfg_.dim);
  estimate_.w_proj = Eigen::VectorXd::Zero(cfg_.dim);
  estimate_.lambda = cfg_.lambda;
  estimate_.param_bound = cfg_.param_bound;
}

Eigen::MatrixXd UnknownModelRunner::bonus_table(double log_inv_delta) const {
  const int S = mdp_.num_states;
  const int A = mdp_.num_actions;
  const double eta = 2.0 * cfg_.param_bound * cfg_.feature_bound;
  Eigen::MatrixXd table(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      table(s, a) = visit_bonus(counts_.n(s, a), eta, log_inv_delta, mdp_.horizon, S, A);
    }
  }
  return table;
}

RoundRecord UnknownModelRunner::step(const DuelOracle& oracle, Rng& rng) {
  const int t = t_;
  const int n_pol = static_cast<int>(policies_.policies.size());
  const int S = mdp_.num_states;
  const int A = mdp_.num_actions;

  rows_ = cfg_.freeze_true_model ? mdp_.transition : empirical_model(counts_);

  feats_hat_.resize(n_pol);
  occ_sums_.assign(n_pol, Eigen::MatrixXd::Zero(S, A));
  for (int k = 0; k < n_pol; ++k) {
    const Policy& p = policies_.policies[k];
    feats_hat_[k] = policy_features_in_model(map_, mdp_, rows_, p, cfg_.enumeration_cap);
    if (p.kind == Policy::Kind::kMarkovDeterministic) {
      const auto occ = occupancy_measures(mdp_, rows_, p);
      for (int h = 0; h + 1 < mdp_.horizon; ++h) occ_sums_[k] += occ[h];
    }
  }
  // Expected bonus of policy k for the level-specific table; falls back to
  // the trajectory walk only for history-dependent rules.
  auto expected_bonus = [&](int k, const Eigen::MatrixXd& table) {
    if (cfg_.zero_bonuses) return 0.0;
    if (policies_.policies[k].kind == Policy::Kind::kMarkovDeterministic) {
      return occ_sums_[k].cwiseProduct(table).sum();
    }
    return bonus_expectation(mdp_, rows_, policies_.policies[k], table, cfg_.enumeration_cap);
  };

  estimate_ = fit_estimate(data_, v_, cfg_.lambda, cfg_.param_bound, &estimate_.w_mle);
  const double radius = confidence_radius(t, cfg_.delta, cfg_.lambda, cfg_.param_bound,
                                          cfg_.feature_bound, cfg_.dim, cfg_.kappa);

  const double log_inv_delta = std::log(1.0 / cfg_.delta);
  const double log_policy_count = S * std::log(static_cast<double>(A));

  // Accumulated bonuses of past duels, re-evaluated under the current counts
  // and model at per-duel confidence levels. The level tightens with both the
  // current round (through the covering resolution) and the duel's index.
  std::vector<std::pair<double, double>> bonus_log;
  if (!cfg_.zero_bonuses && !pair_log_.empty()) {
    const double td = static_cast<double>(t);
    const double eps = 1.0 / (td * td * cfg_.kappa * cfg_.lambda +
                              4.0 * cfg_.feature_bound * cfg_.feature_bound * td * td * td);
    const double log_inv_delta_prime =
        log_inv_delta + cfg_.dim * (std::log(1.0 + 4.0 * cfg_.param_bound) - std::log(eps));
    bonus_log.reserve(pair_log_.size());
    for (std::size_t l = 1; l <= pair_log_.size(); ++l) {
      const double level = log_inv_delta_prime + std::log(8.0) + 3.0 * std::log(static_cast<double>(l)) +
                           log_policy_count;
      const Eigen::MatrixXd table = bonus_table(level);
      const auto [i, j] = pair_log_[l - 1];
      bonus_log.emplace_back(expected_bonus(i, table), expected_bonus(j, table));
    }
  }
  const double multiplier =
      combined_radius(t, cfg_.kappa, radius, margin_,
                      std::span<const std::pair<double, double>>(bonus_log));

  std::vector<double> member_bonus(n_pol, 0.0);
  std::vector<double> select_bonus(n_pol, 0.0);
  last_max_bonus_ = 0.0;
  if (!cfg_.zero_bonuses) {
    const Eigen::MatrixXd member_table = bonus_table(log_inv_delta + std::log(2.0) + log_policy_count);
    const Eigen::MatrixXd select_table = bonus_table(log_inv_delta);
    last_max_bonus_ = select_table.maxCoeff();
    for (int k = 0; k < n_pol; ++k) {
      member_bonus[k] = expected_bonus(k, member_table);
      select_bonus[k] = expected_bonus(k, select_table);
    }
  }

  const std::vector<int> cands =
      candidate_set_with_bonus(feats_hat_, estimate_.w_proj, vtilde_, multiplier, member_bonus);
  const auto [i, j] = select_pair_with_bonus(cands, feats_hat_, vtilde_, multiplier, select_bonus);

  RoundRecord rec;
  rec.t = t;
  rec.policy_one = i;
  rec.policy_two = j;
  rec.radius = multiplier;
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
  const Eigen::VectorXd u = feats_hat_[i] - feats_hat_[j];
  vtilde_.add_outer(u);
  vtilde_log_.push_back(u);
  pair_log_.emplace_back(i, j);
  update_counts(counts_, rec.traj_one);
  update_counts(counts_, rec.traj_two);
  ++t_;
  return rec;
}

}  // namespace pbrl
