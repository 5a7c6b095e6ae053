#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pbrl/features.hpp"
#include "support/test_instances.hpp"

using namespace pbrl;

namespace {

FeatureMap constant_e1_map(const Mdp& mdp, int dim) {
  std::vector<std::vector<Eigen::VectorXd>> table(mdp.num_states);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(dim);
  e1[0] = 1.0;
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) table[s].push_back(e1);
  }
  return FeatureMap::decomposed(dim, std::move(table));
}

}  // namespace

TEST_CASE("decomposed trajectory features sum the per-step vectors") {
  Rng inst_rng(5);
  const Mdp mdp = testing::make_random_mdp(inst_rng, 2, 2, 2);
  const FeatureMap map = constant_e1_map(mdp, 4);
  Trajectory traj;
  traj.steps = {{0, 1}, {1, 0}};
  const Eigen::VectorXd phi = trajectory_features(map, traj);
  CHECK(phi[0] == doctest::Approx(2.0));
  CHECK(phi.tail(3).norm() == doctest::Approx(0.0));
}

TEST_CASE("horizon-one decomposed features are a single lookup") {
  Rng inst_rng(7);
  const Mdp mdp = testing::make_random_mdp(inst_rng, 3, 2, 1);
  const FeatureMap map = testing::make_random_decomposed_map(inst_rng, mdp, 3);
  Trajectory traj;
  traj.steps = {{2, 1}};
  CHECK((trajectory_features(map, traj) - map.per_step(2, 1)).norm() == doctest::Approx(0.0));
}

TEST_CASE("random decomposed features match an independent re-summation") {
  Rng inst_rng(11);
  const Mdp mdp = testing::make_random_mdp(inst_rng, 3, 2, 3);
  const FeatureMap map = testing::make_random_decomposed_map(inst_rng, mdp, 5);
  Rng rng(13);
  const Policy policy = testing::make_random_markov_policy(inst_rng, mdp);
  for (int rep = 0; rep < 10; ++rep) {
    const Trajectory traj = sample_trajectory(mdp, policy, rng);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(5);
    for (const auto& [s, a] : traj.steps) {
      for (int i = 0; i < 5; ++i) expected[i] += map.per_step(s, a)[i];
    }
    CHECK((trajectory_features(map, traj) - expected).norm() < 1e-12);
  }
}

TEST_CASE("tabular lookup misses raise a coverage error") {
  const FeatureMap map = FeatureMap::tabular(2, {{{0, 0}, Eigen::VectorXd::Zero(2)}});
  Trajectory traj;
  traj.steps = {{0, 1}};
  CHECK_THROWS_AS(trajectory_features(map, traj), std::runtime_error);
}

TEST_CASE("policy features") {
  SUBCASE("horizon one averages per-step vectors under rho") {
    Rng inst_rng(17);
    const Mdp mdp = testing::make_random_mdp(inst_rng, 3, 2, 1);
    const FeatureMap map = testing::make_random_decomposed_map(inst_rng, mdp, 4);
    const Policy policy = make_markov_policy({1, 0, 1});
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
    for (int s = 0; s < 3; ++s) {
      expected += mdp.initial_dist[s] * map.per_step(s, policy.markov_action(0, s, 3));
    }
    CHECK((policy_features(map, mdp, policy) - expected).norm() < 1e-12);
  }
  SUBCASE("a deterministic chain reduces to its unique trajectory") {
    Mdp mdp;
    mdp.num_states = 2;
    mdp.num_actions = 1;
    mdp.horizon = 3;
    mdp.initial_dist = Eigen::VectorXd::Zero(2);
    mdp.initial_dist[0] = 1.0;
    Eigen::VectorXd to1(2), stay1(2);
    to1 << 0.0, 1.0;
    stay1 << 0.0, 1.0;
    mdp.transition = {to1, stay1};
    Rng inst_rng(19);
    const FeatureMap map = testing::make_random_decomposed_map(inst_rng, mdp, 3);
    const Policy policy = make_markov_policy({0, 0, 0, 0, 0, 0});
    Trajectory traj;
    traj.steps = {{0, 0}, {1, 0}, {1, 0}};
    CHECK((policy_features(map, mdp, policy) - trajectory_features(map, traj)).norm() < 1e-12);
  }
  SUBCASE("monte carlo agreement on a random instance") {
    Rng inst_rng(23);
    const Mdp mdp = testing::make_random_mdp(inst_rng, 3, 2, 3);
    const FeatureMap map = testing::make_random_decomposed_map(inst_rng, mdp, 4);
    const Policy policy = testing::make_random_markov_policy(inst_rng, mdp);
    const Eigen::VectorXd exact = policy_features(map, mdp, policy);
    const int n = 100000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd second = Eigen::VectorXd::Zero(4);
    Rng rng(29);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd phi = trajectory_features(map, sample_trajectory(mdp, policy, rng));
      mean += phi;
      second += phi.cwiseProduct(phi);
    }
    mean /= n;
    second /= n;
    for (int i = 0; i < 4; ++i) {
      const double var = std::max(second[i] - mean[i] * mean[i], 1e-12);
      CHECK(std::abs(mean[i] - exact[i]) <= 3 * std::sqrt(var / n) + 1e-9);
    }
  }
}

TEST_CASE("policy features in a supplied model") {
  Rng inst_rng(31);
  const Mdp mdp = testing::make_random_mdp(inst_rng, 3, 2, 3);
  const FeatureMap map = testing::make_random_decomposed_map(inst_rng, mdp, 4);
  const Policy policy = testing::make_random_markov_policy(inst_rng, mdp);

  SUBCASE("the true transitions reproduce policy_features") {
    const Eigen::VectorXd a = policy_features(map, mdp, policy);
    const Eigen::VectorXd b = policy_features_in_model(map, mdp, mdp.transition, policy);
    CHECK((a - b).norm() == doctest::Approx(0.0));
  }
  SUBCASE("point-mass rows induce a deterministic trajectory") {
    std::vector<Eigen::VectorXd> rows;
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(3);
        row[(s + a + 1) % 3] = 1.0;
        rows.push_back(row);
      }
    }
    Mdp point = mdp;
    point.initial_dist = Eigen::VectorXd::Zero(3);
    point.initial_dist[1] = 1.0;
    Trajectory traj;
    int s = 1;
    for (int h = 0; h < 3; ++h) {
      const int a = policy.markov_action(h, s, 3);
      traj.steps.emplace_back(s, a);
      s = (s + a + 1) % 3;
    }
    const Eigen::VectorXd via_model = policy_features_in_model(map, point, rows, policy);
    CHECK((via_model - trajectory_features(map, traj)).norm() < 1e-12);
  }
  SUBCASE("monte carlo agreement under a random surrogate model") {
    Rng model_rng(37);
    std::vector<Eigen::VectorXd> rows;
    for (int i = 0; i < 6; ++i) rows.push_back(testing::random_distribution(model_rng, 3, 0.05));
    const Eigen::VectorXd exact = policy_features_in_model(map, mdp, rows, policy);
    Mdp surrogate = mdp;
    surrogate.transition = rows;
    const int n = 100000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd second = Eigen::VectorXd::Zero(4);
    Rng rng(41);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd phi =
          trajectory_features(map, sample_trajectory(surrogate, policy, rng));
      mean += phi;
      second += phi.cwiseProduct(phi);
    }
    mean /= n;
    second /= n;
    for (int i = 0; i < 4; ++i) {
      const double var = std::max(second[i] - mean[i] * mean[i], 1e-12);
      CHECK(std::abs(mean[i] - exact[i]) <= 3 * std::sqrt(var / n) + 1e-9);
    }
  }
}

TEST_CASE("feature bounds") {
  SUBCASE("decomposed bound is horizon times the max per-step norm") {
    Mdp mdp;
    mdp.num_states = 1;
    mdp.num_actions = 1;
    mdp.horizon = 4;
    mdp.initial_dist = Eigen::VectorXd::Ones(1);
    mdp.transition = {Eigen::VectorXd::Ones(1)};
    const FeatureMap map = constant_e1_map(mdp, 2);
    CHECK(feature_bound(map, mdp).value == doctest::Approx(4.0));
  }
  SUBCASE("tabular bound is the exact table max") {
    Eigen::VectorXd v1(1), v2(1), v3(1);
    v1 << 1.0;
    v2 << 2.0;
    v3 << 0.5;
    const FeatureMap map =
        FeatureMap::tabular(1, {{{0, 0}, v1}, {{1, 0}, v2}, {{0, 1}, v3}});
    Mdp mdp;
    mdp.horizon = 1;
    CHECK(feature_bound(map, mdp).value == doctest::Approx(2.0));
  }
  SUBCASE("the decomposed bound dominates the exact enumerated max") {
    Rng inst_rng(43);
    const Mdp mdp = testing::make_random_mdp(inst_rng, 2, 2, 3);
    const FeatureMap map = testing::make_random_decomposed_map(inst_rng, mdp, 3);
    const double bound = feature_bound(map, mdp).value;
    double exact = 0.0;
    for (const Policy& p : testing::make_random_policy_class(inst_rng, mdp, 6).policies) {
      for (const auto& wt : enumerate_trajectories(mdp, p)) {
        exact = std::max(exact, trajectory_features(map, wt.trajectory).norm());
      }
    }
    CHECK(bound >= exact - 1e-12);
  }
}

TEST_CASE("mixture embeddings are the convex combination of the parts") {
  Rng inst_rng(47);
  const Mdp mdp = testing::make_random_mdp(inst_rng, 3, 2, 3);
  const FeatureMap map = testing::make_random_decomposed_map(inst_rng, mdp, 4);
  const PolicyClass pc = testing::make_random_policy_class(inst_rng, mdp, 2);
  const double theta = 0.3;
  // Probability-weighted union of the two policies' enumerations.
  Eigen::VectorXd mixture = Eigen::VectorXd::Zero(4);
  for (const auto& wt : enumerate_trajectories(mdp, pc.policies[0])) {
    mixture += theta * wt.probability * trajectory_features(map, wt.trajectory);
  }
  for (const auto& wt : enumerate_trajectories(mdp, pc.policies[1])) {
    mixture += (1 - theta) * wt.probability * trajectory_features(map, wt.trajectory);
  }
  const Eigen::VectorXd combo = theta * policy_features(map, mdp, pc.policies[0]) +
                                (1 - theta) * policy_features(map, mdp, pc.policies[1]);
  CHECK((mixture - combo).norm() < 1e-9);
}

TEST_CASE("tabular coverage validation walks every producible trajectory") {
  Mdp mdp;
  mdp.num_states = 1;
  mdp.num_actions = 2;
  mdp.horizon = 2;
  mdp.initial_dist = Eigen::VectorXd::Ones(1);
  mdp.transition = {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)};
  std::map<std::vector<int>, Eigen::VectorXd> table;
  for (int a1 : {0, 1}) {
    for (int a2 : {0, 1}) {
      Eigen::VectorXd v(1);
      v << a1 + 2 * a2;
      table[{0, a1, 0, a2}] = v;
    }
  }
  CHECK_NOTHROW(validate_tabular_coverage(FeatureMap::tabular(1, table), mdp));
  table.erase({0, 1, 0, 1});
  CHECK_THROWS_AS(validate_tabular_coverage(FeatureMap::tabular(1, table), mdp),
                  std::invalid_argument);
}
