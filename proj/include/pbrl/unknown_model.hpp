#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pbrl/duel.hpp"
#include "pbrl/estimation.hpp"
#include "pbrl/features.hpp"
#include "pbrl/mdp.hpp"
#include "pbrl/round_record.hpp"

namespace pbrl {

// Per-(s,a) visit totals and per-(s,a,s') transition totals. Visits count all
// H steps; transitions only the H-1 steps with an observed successor, so the
// transition row sum never exceeds the visit count.
struct VisitCounts {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::int64_t> visits;       // s*A + a
  std::vector<std::int64_t> transitions;  // (s*A + a)*S + s'

  VisitCounts(int num_states_, int num_actions_);

  std::int64_t n(int s, int a) const { return visits[static_cast<std::size_t>(s) * num_actions + a]; }
  std::int64_t m(int s, int a, int sp) const {
    return transitions[(static_cast<std::size_t>(s) * num_actions + a) * num_states + sp];
  }
  std::int64_t row_sum(int s, int a) const;

  void validate() const;
};

void update_counts(VisitCounts& counts, const Trajectory& traj);

// Empirical transition rows: observed frequencies where transitions exist,
// uniform where none do.
std::vector<Eigen::VectorXd> empirical_model(const VisitCounts& counts);

// Per-(s,a) model-error bonus min(2*eta, 4*eta*sqrt(U/n)). Confidence enters
// as log(1/delta) so microscopic levels never underflow; n <= 1 clamps to the
// 2*eta branch.
double visit_bonus(std::int64_t n, double eta, double log_inv_delta, int horizon, int num_states,
                   int num_actions);

// Variant whose deviation term also covers all policies simultaneously via an
// eps-resolution covering term.
double uniform_visit_bonus(std::int64_t n, double eps, double eta, double log_inv_delta,
                           int horizon, int num_states, int num_actions);

// Expected sum of per-(s,a) bonuses over the first H-1 steps of a trajectory
// drawn from the policy in the supplied model. H = 1 gives 0.
double bonus_expectation(const Mdp& mdp, const std::vector<Eigen::VectorXd>& model,
                         const Policy& policy, const Eigen::MatrixXd& bonus_table,
                         std::int64_t cap = kDefaultEnumerationCap);

// Radius multiplier combining the estimation radius with the accumulated
// model-error bonuses of past duels.
double combined_radius(int t, double kappa_value, double radius, double margin,
                       std::span<const std::pair<double, double>> bonus_log);

// Candidate filter with model-error slack: rivals must beat a policy by more
// than the inverse-matrix width plus both policies' bonuses.
std::vector<int> candidate_set_with_bonus(const std::vector<Eigen::VectorXd>& feats,
                                          const Eigen::VectorXd& w, const DataMatrix& vtilde,
                                          double radius_multiplier,
                                          const std::vector<double>& bonuses);

// Ordered pair maximizing radius_multiplier * width + 2 * (both bonuses);
// ties broken by lowest index pair.
std::pair<int, int> select_pair_with_bonus(const std::vector<int>& candidates,
                                           const std::vector<Eigen::VectorXd>& feats,
                                           const DataMatrix& vtilde, double radius_multiplier,
                                           const std::vector<double>& bonuses);

struct UnknownModelConfig {
  double lambda = 1.0;
  double delta = 0.1;
  int rounds = 0;
  double param_bound = 1.0;
  double feature_bound = 1.0;
  int dim = 1;
  double kappa = 4.0;
  std::int64_t enumeration_cap = kDefaultEnumerationCap;
  // Test hooks: pin the true dynamics instead of the empirical model, and/or
  // force every bonus to zero.
  bool freeze_true_model = false;
  bool zero_bonuses = false;
};

void validate_unknown_config(const UnknownModelConfig& cfg);

class UnknownModelRunner {
 public:
  UnknownModelRunner(UnknownModelConfig cfg, const Mdp& mdp, const FeatureMap& map,
                     const PolicyClass& policies);

  RoundRecord step(const DuelOracle& oracle, Rng& rng);

  int round() const { return t_; }
  const DataMatrix& data_matrix() const { return v_; }
  const DataMatrix& model_matrix() const { return vtilde_; }
  const DuelDataset& dataset() const { return data_; }
  const Estimate& estimate() const { return estimate_; }
  const VisitCounts& counts() const { return counts_; }
  const std::vector<Eigen::VectorXd>& model_rows() const { return rows_; }
  const std::vector<Eigen::VectorXd>& model_feats() const { return feats_hat_; }
  const std::vector<Eigen::VectorXd>& data_update_log() const { return v_log_; }
  const std::vector<Eigen::VectorXd>& model_update_log() const { return vtilde_log_; }
  const std::vector<std::pair<int, int>>& pair_log() const { return pair_log_; }
  double last_max_bonus() const { return last_max_bonus_; }

 private:
  // Bonus table for every (s,a) at one confidence level under current counts.
  Eigen::MatrixXd bonus_table(double log_inv_delta) const;

  UnknownModelConfig cfg_;
  const Mdp& mdp_;
  const FeatureMap& map_;
  const PolicyClass& policies_;
  int t_ = 1;
  double margin_ = 0.0;
  DataMatrix v_;
  DataMatrix vtilde_;
  DuelDataset data_;
  Estimate estimate_;
  VisitCounts counts_;
  std::vector<Eigen::VectorXd> rows_;       // current model rows
  std::vector<Eigen::VectorXd> feats_hat_;  // policy features in the current model
  std::vector<Eigen::MatrixXd> occ_sums_;   // per policy: occupancy summed over steps 1..H-1
  std::vector<Eigen::VectorXd> v_log_;
  std::vector<Eigen::VectorXd> vtilde_log_;
  std::vector<std::pair<int, int>> pair_log_;
  double last_max_bonus_ = 0.0;
};

}  // namespace pbrl
