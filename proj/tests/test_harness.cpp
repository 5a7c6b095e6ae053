#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pbrl/harness.hpp"
#include "support/test_instances.hpp"

using namespace pbrl;

namespace {

// One state, three actions, horizon one: two co-optimal policies with a wide
// feature gap plus one inferior policy whose difference directions are
// strictly inside theirs. Cheap to run and separates the algorithm from the
// uniform baseline quickly.
ExperimentConfig tiny_duel_config() {
  ExperimentConfig cfg;
  cfg.mdp.num_states = 1;
  cfg.mdp.num_actions = 3;
  cfg.mdp.horizon = 1;
  cfg.mdp.initial_dist = Eigen::VectorXd::Ones(1);
  cfg.mdp.transition = {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1),
                        Eigen::VectorXd::Ones(1)};
  Eigen::VectorXd f0(2), f1(2), f2(2);
  f0 << 1.0, 0.0;
  f1 << -1.0, 0.0;
  f2 << 0.0, -0.3;
  cfg.features = FeatureMap::tabular(2, {{{0, 0}, f0}, {{0, 1}, f1}, {{0, 2}, f2}});
  cfg.policies.policies.push_back(make_markov_policy({0}));
  cfg.policies.policies.push_back(make_markov_policy({1}));
  cfg.policies.policies.push_back(make_markov_policy({2}));
  cfg.preference.w_star = Eigen::VectorXd(2);
  cfg.preference.w_star << 0.0, 0.9;
  cfg.preference.param_bound = 0.9;
  cfg.algorithm = Algorithm::kKnown;
  cfg.lambda = 0.25;
  cfg.delta = 0.1;
  cfg.rounds = 300;
  cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return cfg;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("best policy argmax") {
  ExperimentConfig cfg = tiny_duel_config();
  SUBCASE("zero parameter ties break to the lowest index") {
    const auto [idx, score] = best_policy(cfg.policies, cfg.features, cfg.mdp,
                                          Eigen::VectorXd::Zero(2));
    CHECK(idx == 0);
    CHECK(score == doctest::Approx(0.0));
  }
  SUBCASE("higher score wins") {
    Eigen::VectorXd w(2);
    w << -1.0, 0.0;  // flips the order: policy 1 scores highest
    const auto [idx, score] = best_policy(cfg.policies, cfg.features, cfg.mdp, w);
    CHECK(idx == 1);
    CHECK(score == doctest::Approx(1.0));
  }
  SUBCASE("matches a brute-force rescan on random instances") {
    Rng rng(3);
    for (int rep = 0; rep < 5; ++rep) {
      const Mdp mdp = testing::make_random_mdp(rng, 3, 2, 3);
      const FeatureMap map = testing::make_random_decomposed_map(rng, mdp, 4);
      const PolicyClass pc = testing::make_random_policy_class(rng, mdp, 6);
      const Eigen::VectorXd w = testing::random_unit_vector(rng, 4);
      const auto [idx, score] = best_policy(pc, map, mdp, w);
      int expect = 0;
      double best = -1e300;
      for (int k = 0; k < 6; ++k) {
        const double s = policy_features(map, mdp, pc.policies[k]).dot(w);
        if (s > best) {
          best = s;
          expect = k;
        }
      }
      CHECK(idx == expect);
      CHECK(score == doctest::Approx(best));
    }
  }
}

TEST_CASE("regret increments") {
  CHECK(score_regret_increment(0.7, 0.7, 0.7) == doctest::Approx(0.0));
  CHECK(score_regret_increment(1.0, 0.5, 0.3) == doctest::Approx(0.6));
  CHECK(preference_regret_increment(0.7, 0.7, 0.7) == doctest::Approx(0.0));
  CHECK(preference_regret_increment(std::log(3.0), 0.0, 0.0) == doctest::Approx(0.25));

  SUBCASE("score increments are nonnegative against the argmax") {
    Rng rng(7);
    for (int rep = 0; rep < 1000; ++rep) {
      const double a = rng.next_double();
      const double b = rng.next_double();
      const double star = std::max({a, b, rng.next_double()});
      CHECK(score_regret_increment(star, a, b) >= -1e-12);
    }
  }
  SUBCASE("preference increments recompute from raw scores") {
    Rng rng(11);
    for (int rep = 0; rep < 100; ++rep) {
      const double star = rng.next_double();
      const double a = star - rng.next_double();
      const double b = star - rng.next_double();
      const double direct = preference_regret_increment(star, a, b);
      const double recomputed = 0.5 * (1.0 / (1.0 + std::exp(-(star - a))) +
                                       1.0 / (1.0 + std::exp(-(star - b))) - 1.0);
      CHECK(direct == doctest::Approx(recomputed).epsilon(1e-12));
    }
  }
}

TEST_CASE("sublinearity metric on synthetic curves") {
  const int rounds = 400;
  std::vector<double> linear(rounds), sqrt_curve(rounds);
  for (int t = 1; t <= rounds; ++t) {
    linear[t - 1] = 0.37 * t;
    sqrt_curve[t - 1] = 2.5 * std::sqrt(static_cast<double>(t));
  }
  CHECK(std::abs(sublinearity_metric(linear, rounds) - 1.0) < 1e-6);
  CHECK(std::abs(sublinearity_metric(sqrt_curve, rounds) - 0.5) < 1e-6);
  CHECK(std::isnan(sublinearity_metric(std::vector<double>(rounds, 0.0), rounds)));
}

TEST_CASE("regret sandwich check on synthetic curves") {
  std::vector<double> scr{1.0, 2.0, 3.0};
  std::vector<double> good{0.4, 0.8, 1.2};
  std::vector<double> too_big{0.6, 1.6, 1.6};
  std::vector<double> too_small{0.1, 0.2, 0.3};
  CHECK(regret_sandwich_check(scr, good));
  CHECK_FALSE(regret_sandwich_check(scr, too_big));
  CHECK_FALSE(regret_sandwich_check(scr, too_small));
  CHECK(regret_sandwich_check({0.0, 0.0}, {0.0, 0.0}));
}

TEST_CASE("config json round trip and strictness") {
  ExperimentConfig cfg = tiny_duel_config();
  const std::string text = cfg.to_json_text();
  const ExperimentConfig back = ExperimentConfig::from_json_text(text);
  CHECK(back.rounds == cfg.rounds);
  CHECK(back.lambda == doctest::Approx(cfg.lambda));
  CHECK(back.seeds == cfg.seeds);
  CHECK(back.policies.policies.size() == cfg.policies.policies.size());
  CHECK((back.preference.w_star - cfg.preference.w_star).norm() == doctest::Approx(0.0));

  SUBCASE("unknown keys are rejected") {
    std::string bad = text;
    bad.insert(bad.find_first_of('{') + 1, "\"mystery\": 1,");
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(bad), std::invalid_argument);
  }
  SUBCASE("wrong schema is rejected") {
    std::string bad = text;
    const auto pos = bad.find("\"schema\": 1");
    bad.replace(pos, 11, "\"schema\": 2");
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(bad), std::invalid_argument);
  }
}

TEST_CASE("instance checks pass on a healthy config") {
  const CheckReport report = check_instance(tiny_duel_config());
  for (const auto& [name, ok] : report.entries) {
    INFO(name);
    CHECK(ok);
  }
}

TEST_CASE("zero rounds still produce valid artifacts") {
  ExperimentConfig cfg = tiny_duel_config();
  cfg.rounds = 0;
  cfg.seeds = {9};
  cfg.output_dir = (std::filesystem::temp_directory_path() / "pbrl_t0_out").string();
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.checks.all_ok());
  CHECK(result.curve.seeds.size() == 1);
  CHECK(result.curve.seeds[0].records.empty());
  const std::string csv = read_file(std::filesystem::path(cfg.output_dir) / "curve.csv");
  CHECK(csv == "t,seed,regret_scr,regret_pref,beta_or_gamma,set_size\n");
  const std::string summary = read_file(std::filesystem::path(cfg.output_dir) / "summary.json");
  CHECK(summary.find("\"all_checks_passed\": true") != std::string::npos);
  std::filesystem::remove_all(cfg.output_dir);
}

TEST_CASE("identical config and seeds give byte-identical csv") {
  ExperimentConfig cfg = tiny_duel_config();
  cfg.rounds = 80;
  cfg.seeds = {5, 6};
  const auto base = std::filesystem::temp_directory_path();
  cfg.output_dir = (base / "pbrl_det_a").string();
  run_experiment(cfg);
  const std::string first = read_file(std::filesystem::path(cfg.output_dir) / "curve.csv");
  cfg.output_dir = (base / "pbrl_det_b").string();
  run_experiment(cfg);
  const std::string second = read_file(std::filesystem::path(cfg.output_dir) / "curve.csv");
  CHECK(first == second);
  CHECK(!first.empty());
  std::filesystem::remove_all(base / "pbrl_det_a");
  std::filesystem::remove_all(base / "pbrl_det_b");
}

TEST_CASE("csv round trip reproduces the curve exactly") {
  ExperimentConfig cfg = tiny_duel_config();
  cfg.rounds = 60;
  cfg.seeds = {11, 12, 13};
  const ExperimentResult result = run_experiment(cfg);
  const std::string csv = curve_to_csv(result.curve);
  const RegretCurve back = curve_from_csv(csv);
  REQUIRE(back.seeds.size() == result.curve.seeds.size());
  for (std::size_t i = 0; i < back.seeds.size(); ++i) {
    const SeedResult& a = result.curve.seeds[i];
    const SeedResult& b = back.seeds[i];
    CHECK(a.seed == b.seed);
    REQUIRE(a.cum_scr.size() == b.cum_scr.size());
    for (std::size_t t = 0; t < a.cum_scr.size(); ++t) {
      CHECK(a.cum_scr[t] == b.cum_scr[t]);
      CHECK(a.cum_pref[t] == b.cum_pref[t]);
      CHECK(a.records[t].radius == b.records[t].radius);
      CHECK(a.records[t].set_size == b.records[t].set_size);
    }
  }
  CHECK(curve_to_csv(back) == csv);
}

TEST_CASE("the algorithm beats the uniform baseline on the tiny duel instance") {
  ExperimentConfig cfg = tiny_duel_config();
  const ExperimentResult algo = run_experiment(cfg);
  const ExperimentResult base = run_baseline(cfg);
  CHECK(algo.checks.all_ok());
  const double gap = base.curve.mean_scr.back() - algo.curve.mean_scr.back();
  const double se = std::sqrt(base.curve.se_scr.back() * base.curve.se_scr.back() +
                              algo.curve.se_scr.back() * algo.curve.se_scr.back());
  CHECK(gap >= 3.0 * se);
}

TEST_CASE("run invariants and the sandwich hold on a full run") {
  ExperimentConfig cfg = tiny_duel_config();
  cfg.rounds = 200;
  cfg.seeds = {21, 22};
  const ExperimentResult result = run_experiment(cfg);
  // param_bound * feature_bound = 0.9 < 1, so the sandwich entry must exist.
  bool found = false;
  for (const auto& [name, ok] : result.checks.entries) {
    if (name == "regret_sandwich") {
      found = true;
      CHECK(ok);
    }
  }
  CHECK(found);
  CHECK(result.checks.all_ok());
}

TEST_CASE("unknown-model experiments run end to end") {
  ExperimentConfig cfg = tiny_duel_config();
  cfg.algorithm = Algorithm::kUnknown;
  cfg.rounds = 60;
  cfg.seeds = {31, 32};
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.checks.all_ok());
  CHECK(result.curve.seeds[0].records.size() == 60);
}

TEST_CASE("svg output sketches both panels") {
  ExperimentConfig cfg = tiny_duel_config();
  cfg.rounds = 40;
  cfg.seeds = {41};
  const ExperimentResult result = run_experiment(cfg);
  const std::string svg = curve_to_svg(result.curve);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("log-log") != std::string::npos);
}
