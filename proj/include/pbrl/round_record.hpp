#pragma once

#include <vector>

#include "pbrl/mdp.hpp"

namespace pbrl {

// One round of a dueling run. Learners fill everything except the regret
// fields, which require ground truth and are completed by the harness.
struct RoundRecord {
  int t = 0;
  int policy_one = -1;
  int policy_two = -1;
  int outcome = -1;
  double regret_scr = 0.0;   // instantaneous score regret
  double regret_pref = 0.0;  // instantaneous preference regret
  double radius = 0.0;       // confidence radius diagnostic (known) or combined radius (unknown)
  int set_size = 0;
  std::vector<int> candidate_set;
  Trajectory traj_one;
  Trajectory traj_two;
};

}  // namespace pbrl
