#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbrl/features.hpp"
#include "pbrl/known_model.hpp"
#include "pbrl/mdp.hpp"
#include "pbrl/preference.hpp"
#include "pbrl/round_record.hpp"
#include "pbrl/unknown_model.hpp"

namespace pbrl {

enum class Algorithm { kKnown, kUnknown };

// A complete experiment: instance, hidden preference parameter, algorithm
// selection, and run plan. Loaded from a strict, versioned JSON document.
struct ExperimentConfig {
  Mdp mdp;
  FeatureMap features = FeatureMap::decomposed(0, {});
  PolicyClass policies;
  PreferenceModel preference;
  Algorithm algorithm = Algorithm::kKnown;
  double lambda = 1.0;
  double delta = 0.1;
  int rounds = 0;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  bool emit_svg = false;
  std::int64_t enumeration_cap = kDefaultEnumerationCap;

  double derived_feature_bound() const { return feature_bound(features, mdp).value; }

  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// Full instance validation: stochasticity, dimensions, policy totality,
// coverage, parameter bound. Throws on the first violation.
void validate_config(const ExperimentConfig& cfg);

// Exhaustive argmax of policy score; lowest index wins ties.
std::pair<int, double> best_policy(const PolicyClass& policies, const FeatureMap& map,
                                   const Mdp& mdp, const Eigen::VectorXd& w_star,
                                   std::int64_t cap = kDefaultEnumerationCap);

double score_regret_increment(double s_star, double s_one, double s_two);

// (P(best > one) + P(best > two) - 1) / 2 with policy preferences read off
// the logistic link of score gaps.
double preference_regret_increment(double s_star, double s_one, double s_two);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<RoundRecord> records;
  std::vector<double> cum_scr;   // cumulative score regret per round
  std::vector<double> cum_pref;  // cumulative preference regret per round
};

struct RegretCurve {
  int rounds = 0;
  std::vector<SeedResult> seeds;
  std::vector<double> mean_scr, se_scr, median_scr;
  std::vector<double> mean_pref, se_pref, median_pref;

  void aggregate();
};

struct CheckReport {
  // name -> pass; insertion-ordered for stable output.
  std::vector<std::pair<std::string, bool>> entries;
  std::vector<std::string> notes;

  void add(const std::string& name, bool ok) { entries.emplace_back(name, ok); }
  bool all_ok() const;
};

// Score-argmax vs preference-objective-argmax agreement, evaluated
// exhaustively against the duel history.
bool argmax_consistency_check(const PolicyClass& policies, const FeatureMap& map, const Mdp& mdp,
                              const PreferenceModel& model,
                              const std::vector<std::pair<int, int>>& duels,
                              std::int64_t cap = kDefaultEnumerationCap);

// Prefix-wise sandwich between the two regret notions. Only sound when
// param_bound * feature_bound < 1; callers gate on that.
bool regret_sandwich_check(const std::vector<double>& cum_scr, const std::vector<double>& cum_pref);

// Per-instance consistency checks that need no rounds: validation, the two
// policy-feature paths agreeing, bounds, link antisymmetry, argmax agreement.
CheckReport check_instance(const ExperimentConfig& cfg);

struct ExperimentResult {
  RegretCurve curve;
  CheckReport checks;
  double sublinearity_scr = 0.0;
  int best_policy_index = -1;
  double best_policy_score = 0.0;
};

// Runs every seed (in parallel), aggregates, checks run invariants, and
// persists curve.csv / summary.json (plus curve.svg when asked) under
// output_dir if set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Uniform-random pair selection under the same duel protocol; the
// in-tree comparison baseline for acceptance experiments.
ExperimentResult run_baseline(const ExperimentConfig& cfg);

// Least-squares slope of log cum regret vs log t over t in [T/4, T];
// nonpositive values are skipped. NaN when fewer than two usable points.
double sublinearity_metric(const std::vector<double>& cum, int rounds);

// CSV with header t,seed,regret_scr,regret_pref,beta_or_gamma,set_size and
// full-precision cumulative values; writing then parsing is lossless.
std::string curve_to_csv(const RegretCurve& curve);
RegretCurve curve_from_csv(const std::string& text);

std::string summary_to_json(const ExperimentConfig& cfg, const ExperimentResult& result);
std::string curve_to_svg(const RegretCurve& curve);

}  // namespace pbrl
