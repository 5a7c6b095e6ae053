#include "pbrl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pbrl {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void expect_keys(const json& j, const std::string& where, const std::vector<std::string>& required,
                 const std::vector<std::string>& optional = {}) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& key : required) {
    if (!j.contains(key)) throw std::invalid_argument("config: " + where + " missing key '" + key + "'");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(required.begin(), required.end(), key) == required.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end()) {
      throw std::invalid_argument("config: " + where + " has unknown key '" + key + "'");
    }
  }
}

Eigen::VectorXd to_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw std::invalid_argument("config: " + where + " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

// Full-precision, locale-independent float formatting; reparsing is exact.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double se_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  expect_keys(j, "root",
              {"schema", "algorithm", "rounds", "lambda", "delta", "seeds", "mdp", "features",
               "policies", "preference"},
              {"output_dir", "emit_svg", "enumeration_cap"});
  if (j.at("schema").get<int>() != 1) throw std::invalid_argument("config: unsupported schema version");

  ExperimentConfig cfg;
  const std::string algo = j.at("algorithm").get<std::string>();
  if (algo == "known") {
    cfg.algorithm = Algorithm::kKnown;
  } else if (algo == "unknown") {
    cfg.algorithm = Algorithm::kUnknown;
  } else {
    throw std::invalid_argument("config: algorithm must be 'known' or 'unknown'");
  }
  cfg.rounds = j.at("rounds").get<int>();
  cfg.lambda = j.at("lambda").get<double>();
  cfg.delta = j.at("delta").get<double>();
  cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("emit_svg")) cfg.emit_svg = j.at("emit_svg").get<bool>();
  if (j.contains("enumeration_cap")) cfg.enumeration_cap = j.at("enumeration_cap").get<std::int64_t>();

  const json& jm = j.at("mdp");
  expect_keys(jm, "mdp", {"num_states", "num_actions", "horizon", "initial_dist", "transitions"});
  cfg.mdp.num_states = jm.at("num_states").get<int>();
  cfg.mdp.num_actions = jm.at("num_actions").get<int>();
  cfg.mdp.horizon = jm.at("horizon").get<int>();
  cfg.mdp.initial_dist = to_vector(jm.at("initial_dist"), "mdp.initial_dist");
  const json& jt = jm.at("transitions");
  if (!jt.is_array() || static_cast<int>(jt.size()) != cfg.mdp.num_states) {
    throw std::invalid_argument("config: mdp.transitions must list one block per state");
  }
  for (int s = 0; s < cfg.mdp.num_states; ++s) {
    if (!jt[s].is_array() || static_cast<int>(jt[s].size()) != cfg.mdp.num_actions) {
      throw std::invalid_argument("config: mdp.transitions rows per action mismatch");
    }
    for (int a = 0; a < cfg.mdp.num_actions; ++a) {
      cfg.mdp.transition.push_back(to_vector(jt[s][a], "mdp.transitions row"));
    }
  }

  const json& jf = j.at("features");
  const std::string kind = jf.at("kind").get<std::string>();
  if (kind == "decomposed") {
    expect_keys(jf, "features", {"dim", "kind", "per_state_action"});
    const int dim = jf.at("dim").get<int>();
    const json& table = jf.at("per_state_action");
    std::vector<std::vector<Eigen::VectorXd>> sa(cfg.mdp.num_states);
    if (static_cast<int>(table.size()) != cfg.mdp.num_states) {
      throw std::invalid_argument("config: features.per_state_action must list one row per state");
    }
    for (int s = 0; s < cfg.mdp.num_states; ++s) {
      if (static_cast<int>(table[s].size()) != cfg.mdp.num_actions) {
        throw std::invalid_argument("config: features.per_state_action entries per action mismatch");
      }
      for (int a = 0; a < cfg.mdp.num_actions; ++a) {
        sa[s].push_back(to_vector(table[s][a], "features vector"));
      }
    }
    cfg.features = FeatureMap::decomposed(dim, std::move(sa));
  } else if (kind == "tabular") {
    expect_keys(jf, "features", {"dim", "kind", "entries"});
    const int dim = jf.at("dim").get<int>();
    std::map<std::vector<int>, Eigen::VectorXd> table;
    for (const json& entry : jf.at("entries")) {
      expect_keys(entry, "features.entries[]", {"steps", "vector"});
      table[entry.at("steps").get<std::vector<int>>()] = to_vector(entry.at("vector"), "features vector");
    }
    cfg.features = FeatureMap::tabular(dim, std::move(table));
  } else {
    throw std::invalid_argument("config: features.kind must be 'decomposed' or 'tabular'");
  }

  for (const json& jp : j.at("policies")) {
    const std::string pkind = jp.at("kind").get<std::string>();
    Policy p;
    if (pkind == "markov") {
      expect_keys(jp, "policies[]", {"kind", "actions"});
      const json& actions = jp.at("actions");
      if (static_cast<int>(actions.size()) != cfg.mdp.horizon) {
        throw std::invalid_argument("config: markov policy needs one action row per step");
      }
      p.kind = Policy::Kind::kMarkovDeterministic;
      for (const json& row : actions) {
        if (static_cast<int>(row.size()) != cfg.mdp.num_states) {
          throw std::invalid_argument("config: markov policy row size mismatch");
        }
        for (const json& a : row) p.markov.push_back(a.get<int>());
      }
    } else if (pkind == "history") {
      expect_keys(jp, "policies[]", {"kind", "rules"});
      p.kind = Policy::Kind::kHistoryDependent;
      for (const json& rule : jp.at("rules")) {
        expect_keys(rule, "policies[].rules[]", {"prefix", "action"});
        p.history[rule.at("prefix").get<std::vector<int>>()] = rule.at("action").get<int>();
      }
    } else {
      throw std::invalid_argument("config: policy kind must be 'markov' or 'history'");
    }
    cfg.policies.policies.push_back(std::move(p));
  }

  const json& jpref = j.at("preference");
  expect_keys(jpref, "preference", {"w_star", "param_bound"});
  cfg.preference.w_star = to_vector(jpref.at("w_star"), "preference.w_star");
  cfg.preference.param_bound = jpref.at("param_bound").get<double>();
  return cfg;
}

std::string ExperimentConfig::to_json_text() const {
  ordered_json j;
  j["schema"] = 1;
  j["algorithm"] = algorithm == Algorithm::kKnown ? "known" : "unknown";
  j["rounds"] = rounds;
  j["lambda"] = lambda;
  j["delta"] = delta;
  j["seeds"] = seeds;
  if (!output_dir.empty()) j["output_dir"] = output_dir;
  if (emit_svg) j["emit_svg"] = true;
  j["enumeration_cap"] = enumeration_cap;
  j["mdp"]["num_states"] = mdp.num_states;
  j["mdp"]["num_actions"] = mdp.num_actions;
  j["mdp"]["horizon"] = mdp.horizon;
  j["mdp"]["initial_dist"] = std::vector<double>(mdp.initial_dist.data(),
                                                 mdp.initial_dist.data() + mdp.initial_dist.size());
  ordered_json trans = ordered_json::array();
  for (int s = 0; s < mdp.num_states; ++s) {
    ordered_json per_action = ordered_json::array();
    for (int a = 0; a < mdp.num_actions; ++a) {
      const Eigen::VectorXd& row = mdp.row(s, a);
      per_action.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    trans.push_back(per_action);
  }
  j["mdp"]["transitions"] = trans;
  j["features"]["dim"] = features.dim();
  if (features.kind() == FeatureMap::Kind::kDecomposed) {
    j["features"]["kind"] = "decomposed";
    ordered_json table = ordered_json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
      ordered_json per_action = ordered_json::array();
      for (int a = 0; a < mdp.num_actions; ++a) {
        const Eigen::VectorXd& v = features.per_step(s, a);
        per_action.push_back(std::vector<double>(v.data(), v.data() + v.size()));
      }
      table.push_back(per_action);
    }
    j["features"]["per_state_action"] = table;
  } else {
    j["features"]["kind"] = "tabular";
    ordered_json entries = ordered_json::array();
    for (const auto& [steps, vec] : features.table()) {
      ordered_json entry;
      entry["steps"] = steps;
      entry["vector"] = std::vector<double>(vec.data(), vec.data() + vec.size());
      entries.push_back(entry);
    }
    j["features"]["entries"] = entries;
  }
  ordered_json pols = ordered_json::array();
  for (const Policy& p : policies.policies) {
    ordered_json jp;
    if (p.kind == Policy::Kind::kMarkovDeterministic) {
      jp["kind"] = "markov";
      ordered_json rows = ordered_json::array();
      for (int h = 0; h < mdp.horizon; ++h) {
        std::vector<int> row(p.markov.begin() + static_cast<std::size_t>(h) * mdp.num_states,
                             p.markov.begin() + static_cast<std::size_t>(h + 1) * mdp.num_states);
        rows.push_back(row);
      }
      jp["actions"] = rows;
    } else {
      jp["kind"] = "history";
      ordered_json rules = ordered_json::array();
      for (const auto& [prefix, action] : p.history) {
        ordered_json rule;
        rule["prefix"] = prefix;
        rule["action"] = action;
        rules.push_back(rule);
      }
      jp["rules"] = rules;
    }
    pols.push_back(jp);
  }
  j["policies"] = pols;
  j["preference"]["w_star"] = std::vector<double>(
      preference.w_star.data(), preference.w_star.data() + preference.w_star.size());
  j["preference"]["param_bound"] = preference.param_bound;
  return j.dump(2);
}

void validate_config(const ExperimentConfig& cfg) {
  validate_mdp(cfg.mdp);
  validate_policy_class(cfg.policies, cfg.mdp);
  validate_preference_model(cfg.preference);
  if (cfg.preference.w_star.size() != cfg.features.dim()) {
    throw std::invalid_argument("config: preference dimension disagrees with the feature map");
  }
  if (cfg.features.kind() == FeatureMap::Kind::kDecomposed) {
    if (static_cast<int>(cfg.mdp.num_states) < 1) throw std::invalid_argument("config: empty mdp");
  } else {
    validate_tabular_coverage(cfg.features, cfg.mdp, cfg.enumeration_cap);
  }
  if (!(cfg.delta > 0.0) || cfg.delta > std::exp(-1.0) + 1e-15) {
    throw std::invalid_argument("config: delta must lie in (0, 1/e]");
  }
  const double b = cfg.derived_feature_bound();
  const double k = kappa(b, cfg.preference.param_bound);
  if (cfg.lambda < b / k - 1e-12) {
    throw std::invalid_argument("config: lambda must be at least feature_bound / kappa");
  }
  if (cfg.rounds < 0) throw std::invalid_argument("config: rounds must be nonnegative");
  if (cfg.seeds.empty()) throw std::invalid_argument("config: need at least one seed");
}

std::pair<int, double> best_policy(const PolicyClass& policies, const FeatureMap& map,
                                   const Mdp& mdp, const Eigen::VectorXd& w_star,
                                   std::int64_t cap) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < policies.policies.size(); ++k) {
    const double s = policy_features(map, mdp, policies.policies[k], cap).dot(w_star);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(k);
    }
  }
  return {best, best_score};
}

double score_regret_increment(double s_star, double s_one, double s_two) {
  return (2.0 * s_star - s_one - s_two) / 2.0;
}

double preference_regret_increment(double s_star, double s_one, double s_two) {
  return (sigmoid(s_star - s_one) + sigmoid(s_star - s_two) - 1.0) / 2.0;
}

void RegretCurve::aggregate() {
  mean_scr.assign(rounds, 0.0);
  se_scr.assign(rounds, 0.0);
  median_scr.assign(rounds, 0.0);
  mean_pref.assign(rounds, 0.0);
  se_pref.assign(rounds, 0.0);
  median_pref.assign(rounds, 0.0);
  for (int t = 0; t < rounds; ++t) {
    std::vector<double> scr, pref;
    scr.reserve(seeds.size());
    pref.reserve(seeds.size());
    for (const SeedResult& sr : seeds) {
      scr.push_back(sr.cum_scr[t]);
      pref.push_back(sr.cum_pref[t]);
    }
    mean_scr[t] = mean_of(scr);
    se_scr[t] = se_of(scr);
    median_scr[t] = median_of(scr);
    mean_pref[t] = mean_of(pref);
    se_pref[t] = se_of(pref);
    median_pref[t] = median_of(pref);
  }
}

bool CheckReport::all_ok() const {
  for (const auto& [name, ok] : entries) {
    if (!ok) return false;
  }
  return true;
}

bool argmax_consistency_check(const PolicyClass& policies, const FeatureMap& map, const Mdp& mdp,
                              const PreferenceModel& model,
                              const std::vector<std::pair<int, int>>& duels, std::int64_t cap) {
  const int n = static_cast<int>(policies.policies.size());
  std::vector<double> score(n);
  for (int k = 0; k < n; ++k) score[k] = policy_score(model, map, mdp, policies.policies[k], cap);
  int score_argmax = 0;
  for (int k = 1; k < n; ++k) {
    if (score[k] > score[score_argmax]) score_argmax = k;
  }
  int pref_argmax = 0;
  double best_obj = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    double obj = 0.0;
    for (const auto& [i, j] : duels) {
      obj += (sigmoid(score[k] - score[i]) + sigmoid(score[k] - score[j]) - 1.0) / 2.0;
    }
    if (obj > best_obj) {
      best_obj = obj;
      pref_argmax = k;
    }
  }
  return score_argmax == pref_argmax;
}

bool regret_sandwich_check(const std::vector<double>& cum_scr,
                           const std::vector<double>& cum_pref) {
  constexpr double kSlack = 1e-12;
  const double upper_factor = 0.5;
  const double lower_factor = 1.0 / (2.0 * (std::numbers::e + 1.0));
  for (std::size_t t = 0; t < cum_scr.size(); ++t) {
    if (cum_pref[t] > upper_factor * cum_scr[t] + kSlack) return false;
    if (cum_pref[t] < lower_factor * cum_scr[t] - kSlack) return false;
  }
  return true;
}

namespace {

enum class PairRule { kAlgorithm, kUniform };

SeedResult run_one_seed(const ExperimentConfig& cfg, std::uint64_t seed, PairRule rule,
                        const std::vector<double>& scores, double s_star) {
  SeedResult out;
  out.seed = seed;
  Rng rng(seed);
  const DuelOracle oracle = make_duel_oracle(cfg.preference, cfg.features);
  const double b = cfg.derived_feature_bound();
  const double k = kappa(b, cfg.preference.param_bound);

  std::unique_ptr<KnownModelRunner> known;
  std::unique_ptr<UnknownModelRunner> unknown;
  if (rule == PairRule::kAlgorithm) {
    if (cfg.algorithm == Algorithm::kKnown) {
      KnownModelConfig kc;
      kc.lambda = cfg.lambda;
      kc.delta = cfg.delta;
      kc.rounds = cfg.rounds;
      kc.param_bound = cfg.preference.param_bound;
      kc.feature_bound = b;
      kc.dim = cfg.features.dim();
      kc.kappa = k;
      known = std::make_unique<KnownModelRunner>(kc, cfg.mdp, cfg.features, cfg.policies);
    } else {
      UnknownModelConfig uc;
      uc.lambda = cfg.lambda;
      uc.delta = cfg.delta;
      uc.rounds = cfg.rounds;
      uc.param_bound = cfg.preference.param_bound;
      uc.feature_bound = b;
      uc.dim = cfg.features.dim();
      uc.kappa = k;
      uc.enumeration_cap = cfg.enumeration_cap;
      unknown = std::make_unique<UnknownModelRunner>(uc, cfg.mdp, cfg.features, cfg.policies);
    }
  }

  double cum_scr = 0.0;
  double cum_pref = 0.0;
  const int n_pol = static_cast<int>(cfg.policies.policies.size());
  for (int t = 1; t <= cfg.rounds; ++t) {
    RoundRecord rec;
    if (rule == PairRule::kAlgorithm) {
      rec = known ? known->step(oracle, rng) : unknown->step(oracle, rng);
    } else {
      rec.t = t;
      rec.policy_one = rng.uniform_int(n_pol);
      rec.policy_two = rng.uniform_int(n_pol);
      rec.set_size = n_pol;
      rec.traj_one = sample_trajectory(cfg.mdp, cfg.policies.policies[rec.policy_one], rng);
      rec.traj_two = sample_trajectory(cfg.mdp, cfg.policies.policies[rec.policy_two], rng);
      rec.outcome = oracle(rec.traj_one, rec.traj_two, rng);
    }
    rec.regret_scr = score_regret_increment(s_star, scores[rec.policy_one], scores[rec.policy_two]);
    rec.regret_pref =
        preference_regret_increment(s_star, scores[rec.policy_one], scores[rec.policy_two]);
    cum_scr += rec.regret_scr;
    cum_pref += rec.regret_pref;
    out.records.push_back(rec);
    out.cum_scr.push_back(cum_scr);
    out.cum_pref.push_back(cum_pref);
  }
  return out;
}

ExperimentResult run_with_rule(const ExperimentConfig& cfg, PairRule rule) {
  validate_config(cfg);
  ExperimentResult result;
  const auto [best_idx, best_score] = best_policy(cfg.policies, cfg.features, cfg.mdp,
                                                  cfg.preference.w_star, cfg.enumeration_cap);
  result.best_policy_index = best_idx;
  result.best_policy_score = best_score;
  std::vector<double> scores(cfg.policies.policies.size());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    scores[k] = policy_score(cfg.preference, cfg.features, cfg.mdp, cfg.policies.policies[k],
                             cfg.enumeration_cap);
  }

  result.curve.rounds = cfg.rounds;
  result.curve.seeds.resize(cfg.seeds.size());
  // Seed-parallel: each run owns its generator and state; aggregation joins.
  std::vector<std::future<SeedResult>> futures;
  futures.reserve(cfg.seeds.size());
  for (std::uint64_t seed : cfg.seeds) {
    futures.push_back(std::async(std::launch::async, [&, seed] {
      return run_one_seed(cfg, seed, rule, scores, best_score);
    }));
  }
  for (std::size_t i = 0; i < futures.size(); ++i) result.curve.seeds[i] = futures[i].get();
  result.curve.aggregate();
  result.sublinearity_scr = sublinearity_metric(result.curve.mean_scr, cfg.rounds);

  // Run-level invariants.
  bool nonneg = true;
  bool pref_in_range = true;
  bool monotone = true;
  std::vector<std::pair<int, int>> duels;
  for (const SeedResult& sr : result.curve.seeds) {
    double prev = 0.0;
    for (const RoundRecord& rec : sr.records) {
      if (rec.regret_scr < -1e-12) nonneg = false;
      if (rec.regret_pref < -0.5 - 1e-12 || rec.regret_pref > 0.5 + 1e-12) pref_in_range = false;
      duels.emplace_back(rec.policy_one, rec.policy_two);
    }
    for (double c : sr.cum_scr) {
      if (c < prev - 1e-12) monotone = false;
      prev = c;
    }
  }
  result.checks.add("score_regret_nonnegative", nonneg);
  result.checks.add("preference_regret_in_range", pref_in_range);
  result.checks.add("cumulative_regret_monotone", monotone);
  result.checks.add("score_pref_argmax_match",
                    argmax_consistency_check(cfg.policies, cfg.features, cfg.mdp, cfg.preference,
                                             duels, cfg.enumeration_cap));
  const double sb = cfg.preference.param_bound * cfg.derived_feature_bound();
  if (sb < 1.0) {
    bool sandwich = true;
    for (const SeedResult& sr : result.curve.seeds) {
      if (!regret_sandwich_check(sr.cum_scr, sr.cum_pref)) sandwich = false;
    }
    result.checks.add("regret_sandwich", sandwich);
  } else {
    result.checks.notes.push_back("regret_sandwich not applicable: param_bound * feature_bound >= 1");
  }

  if (!cfg.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    {
      std::ofstream csv(fs::path(cfg.output_dir) / "curve.csv", std::ios::binary);
      csv << curve_to_csv(result.curve);
    }
    {
      std::ofstream summary(fs::path(cfg.output_dir) / "summary.json", std::ios::binary);
      summary << summary_to_json(cfg, result);
    }
    if (cfg.emit_svg) {
      std::ofstream svg(fs::path(cfg.output_dir) / "curve.svg", std::ios::binary);
      svg << curve_to_svg(result.curve);
    }
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return run_with_rule(cfg, PairRule::kAlgorithm);
}

ExperimentResult run_baseline(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  copy.output_dir.clear();  // baseline never owns output files
  return run_with_rule(copy, PairRule::kUniform);
}

double sublinearity_metric(const std::vector<double>& cum, int rounds) {
  const int start = std::max(1, (rounds + 3) / 4);
  std::vector<double> xs, ys;
  for (int t = start; t <= rounds && t <= static_cast<int>(cum.size()); ++t) {
    const double r = cum[t - 1];
    if (r <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(t)));
    ys.push_back(std::log(r));
  }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

std::string curve_to_csv(const RegretCurve& curve) {
  std::string out = "t,seed,regret_scr,regret_pref,beta_or_gamma,set_size\n";
  for (const SeedResult& sr : curve.seeds) {
    for (std::size_t i = 0; i < sr.records.size(); ++i) {
      const RoundRecord& rec = sr.records[i];
      out += std::to_string(rec.t);
      out += ',';
      out += std::to_string(sr.seed);
      out += ',';
      out += format_double(sr.cum_scr[i]);
      out += ',';
      out += format_double(sr.cum_pref[i]);
      out += ',';
      out += format_double(rec.radius);
      out += ',';
      out += std::to_string(rec.set_size);
      out += '\n';
    }
  }
  return out;
}

RegretCurve curve_from_csv(const std::string& text) {
  RegretCurve curve;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t,seed,regret_scr,regret_pref,beta_or_gamma,set_size") {
    throw std::invalid_argument("curve csv: bad header");
  }
  std::map<std::uint64_t, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    RoundRecord rec;
    std::getline(row, field, ',');
    rec.t = std::stoi(field);
    std::getline(row, field, ',');
    const std::uint64_t seed = std::stoull(field);
    std::getline(row, field, ',');
    const double scr = std::stod(field);
    std::getline(row, field, ',');
    const double pref = std::stod(field);
    std::getline(row, field, ',');
    rec.radius = std::stod(field);
    std::getline(row, field, ',');
    rec.set_size = std::stoi(field);
    auto [it, inserted] = index.try_emplace(seed, curve.seeds.size());
    if (inserted) {
      curve.seeds.emplace_back();
      curve.seeds.back().seed = seed;
    }
    SeedResult& sr = curve.seeds[it->second];
    sr.records.push_back(rec);
    sr.cum_scr.push_back(scr);
    sr.cum_pref.push_back(pref);
  }
  for (const SeedResult& sr : curve.seeds) {
    curve.rounds = std::max(curve.rounds, static_cast<int>(sr.records.size()));
  }
  curve.aggregate();
  return curve;
}

std::string summary_to_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  ordered_json j;
  j["schema"] = 1;
  j["algorithm"] = cfg.algorithm == Algorithm::kKnown ? "known" : "unknown";
  j["rounds"] = cfg.rounds;
  j["seeds"] = cfg.seeds;
  j["best_policy"] = result.best_policy_index;
  j["best_policy_score"] = result.best_policy_score;
  const RegretCurve& curve = result.curve;
  if (curve.rounds > 0) {
    j["final"]["scr"]["mean"] = curve.mean_scr.back();
    j["final"]["scr"]["se"] = curve.se_scr.back();
    j["final"]["scr"]["median"] = curve.median_scr.back();
    j["final"]["pref"]["mean"] = curve.mean_pref.back();
    j["final"]["pref"]["se"] = curve.se_pref.back();
    j["final"]["pref"]["median"] = curve.median_pref.back();
    std::vector<double> finals;
    for (const SeedResult& sr : curve.seeds) finals.push_back(sr.cum_scr.back());
    j["final"]["scr"]["per_seed"] = finals;
  } else {
    j["final"] = nullptr;
  }
  if (std::isnan(result.sublinearity_scr)) {
    j["sublinearity_scr"] = nullptr;
  } else {
    j["sublinearity_scr"] = result.sublinearity_scr;
  }
  ordered_json checks;
  for (const auto& [name, ok] : result.checks.entries) checks[name] = ok;
  j["checks"] = checks;
  j["notes"] = result.checks.notes;
  j["all_checks_passed"] = result.checks.all_ok();
  return j.dump(2);
}

CheckReport check_instance(const ExperimentConfig& cfg) {
  CheckReport report;
  auto guarded = [&report](const std::string& name, auto&& fn) {
    try {
      report.add(name, fn());
    } catch (const std::exception& e) {
      report.add(name, false);
      report.notes.push_back(name + ": " + e.what());
    }
  };

  guarded("config_valid", [&] {
    validate_config(cfg);
    return true;
  });
  guarded("feature_paths_agree", [&] {
    // The occupancy and enumeration routes must agree whenever both apply.
    if (cfg.features.kind() != FeatureMap::Kind::kDecomposed) return true;
    for (const Policy& p : cfg.policies.policies) {
      if (p.kind != Policy::Kind::kMarkovDeterministic) continue;
      const Eigen::VectorXd via_occ = policy_features(cfg.features, cfg.mdp, p);
      Eigen::VectorXd via_enum = Eigen::VectorXd::Zero(cfg.features.dim());
      for (const auto& wt : enumerate_trajectories(cfg.mdp, p, cfg.enumeration_cap)) {
        via_enum += wt.probability * trajectory_features(cfg.features, wt.trajectory);
      }
      if ((via_occ - via_enum).norm() > 1e-9) return false;
    }
    return true;
  });
  guarded("feature_norms_bounded", [&] {
    const double b = cfg.derived_feature_bound();
    for (const Policy& p : cfg.policies.policies) {
      for (const auto& wt : enumerate_trajectories(cfg.mdp, p, cfg.enumeration_cap)) {
        if (trajectory_features(cfg.features, wt.trajectory).norm() > b + 1e-9) return false;
      }
    }
    return true;
  });
  guarded("preference_antisymmetry", [&] {
    std::vector<Trajectory> trajs;
    for (const Policy& p : cfg.policies.policies) {
      for (const auto& wt : enumerate_trajectories(cfg.mdp, p, cfg.enumeration_cap)) {
        trajs.push_back(wt.trajectory);
        if (trajs.size() >= 20) break;
      }
      if (trajs.size() >= 20) break;
    }
    for (const Trajectory& a : trajs) {
      for (const Trajectory& b : trajs) {
        const double sum = preference_prob(cfg.preference, cfg.features, a, b) +
                           preference_prob(cfg.preference, cfg.features, b, a);
        if (std::abs(sum - 1.0) > 1e-12) return false;
      }
    }
    return true;
  });
  guarded("score_pref_argmax_match", [&] {
    std::vector<std::pair<int, int>> all_pairs;
    const int n = static_cast<int>(cfg.policies.policies.size());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) all_pairs.emplace_back(i, j);
    }
    return argmax_consistency_check(cfg.policies, cfg.features, cfg.mdp, cfg.preference, all_pairs,
                                    cfg.enumeration_cap);
  });
  return report;
}

std::string curve_to_svg(const RegretCurve& curve) {
  // Two panels: mean cumulative score regret on linear axes and on log-log
  // axes. Hand-rolled static plot, no dependencies.
  const int w = 460;
  const int h = 320;
  const int margin = 45;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << 2 * w << "' height='" << h << "'>\n";
  auto panel = [&](int x0, bool loglog, const std::string& title) {
    svg << "<rect x='" << x0 + margin << "' y='" << margin / 2 << "' width='" << w - 2 * margin
        << "' height='" << h - margin - margin / 2 << "' fill='none' stroke='black'/>\n";
    svg << "<text x='" << x0 + w / 2 << "' y='" << margin / 2 - 6
        << "' text-anchor='middle' font-size='13'>" << title << "</text>\n";
    if (curve.rounds < 2) return;
    double xmin = loglog ? std::log(1.0) : 1.0;
    double xmax = loglog ? std::log(static_cast<double>(curve.rounds)) : curve.rounds;
    double ymax = 1e-300;
    for (double v : curve.mean_scr) ymax = std::max(ymax, v);
    if (ymax <= 0) ymax = 1.0;
    double ymin = loglog ? ymax : 0.0;
    if (loglog) {
      for (double v : curve.mean_scr) {
        if (v > 0) ymin = std::min(ymin, v);
      }
      ymin = std::log(std::max(ymin, 1e-12));
      ymax = std::log(ymax);
      if (ymax <= ymin) ymax = ymin + 1.0;
    }
    std::ostringstream points;
    for (int t = 1; t <= curve.rounds; ++t) {
      double xv = loglog ? std::log(static_cast<double>(t)) : t;
      double yv = curve.mean_scr[t - 1];
      if (loglog) {
        if (yv <= 0) continue;
        yv = std::log(yv);
      }
      const double px = x0 + margin + (xv - xmin) / (xmax - xmin) * (w - 2 * margin);
      const double py = (h - margin) - (yv - ymin) / (ymax - ymin) * (h - margin - margin / 2);
      points << px << ',' << py << ' ';
    }
    svg << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='" << points.str()
        << "'/>\n";
  };
  panel(0, false, "mean cumulative score regret");
  panel(w, true, "log-log");
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace pbrl
