#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "pbrl/duel.hpp"
#include "pbrl/estimation.hpp"
#include "pbrl/features.hpp"
#include "pbrl/mdp.hpp"
#include "pbrl/round_record.hpp"

namespace pbrl {

// Dueling policy optimization with known transition dynamics.
struct KnownModelConfig {
  double lambda = 1.0;
  double delta = 0.1;
  int rounds = 0;            // T
  double param_bound = 1.0;  // S
  double feature_bound = 1.0;
  int dim = 1;
  double kappa = 4.0;
};

// Enforces lambda >= feature_bound / kappa and delta in (0, 1/e].
void validate_known_config(const KnownModelConfig& cfg);

// Extra confidence width that covers measuring uncertainty in the
// expected-feature matrix instead of the realized one.
double expected_feature_margin(int dim, int rounds, double delta, double feature_bound,
                               double param_bound);

// Policies not beaten by any rival once the rival's lead is discounted by
// threshold * the pair's inverse-matrix norm. Never empty: it always contains
// the argmax of feats'w.
std::vector<int> candidate_set(const std::vector<Eigen::VectorXd>& feats,
                               const Eigen::VectorXd& w, const DataMatrix& vbar,
                               double threshold);

// Most uncertain ordered pair within the candidate set; ties broken by lowest
// index pair. A singleton set duels with itself.
std::pair<int, int> select_pair(const std::vector<int>& candidates,
                                const std::vector<Eigen::VectorXd>& feats,
                                const DataMatrix& vbar);

class KnownModelRunner {
 public:
  KnownModelRunner(KnownModelConfig cfg, const Mdp& mdp, const FeatureMap& map,
                   const PolicyClass& policies);

  RoundRecord step(const DuelOracle& oracle, Rng& rng);

  int round() const { return t_; }
  const DataMatrix& data_matrix() const { return v_; }
  const DataMatrix& expected_matrix() const { return vbar_; }
  const DuelDataset& dataset() const { return data_; }
  const Estimate& estimate() const { return estimate_; }
  const std::vector<Eigen::VectorXd>& policy_feats() const { return feats_; }
  const std::vector<Eigen::VectorXd>& data_update_log() const { return v_log_; }
  const std::vector<Eigen::VectorXd>& expected_update_log() const { return vbar_log_; }

 private:
  KnownModelConfig cfg_;
  const Mdp& mdp_;
  const FeatureMap& map_;
  const PolicyClass& policies_;
  int t_ = 1;
  double margin_ = 0.0;  // expected_feature_margin, fixed for the run
  DataMatrix v_;
  DataMatrix vbar_;
  DuelDataset data_;
  Estimate estimate_;
  std::vector<Eigen::VectorXd> feats_;     // cached expected features per policy
  std::vector<Eigen::VectorXd> v_log_;     // rank-one terms behind v_
  std::vector<Eigen::VectorXd> vbar_log_;  // rank-one terms behind vbar_
};

}  // namespace pbrl
