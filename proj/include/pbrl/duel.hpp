#pragma once

#include <functional>

#include "pbrl/mdp.hpp"
#include "pbrl/rng.hpp"

namespace pbrl {

// One preference query: returns 1 iff the first trajectory wins. Learners
// only ever see this handle, never the model behind it.
using DuelOracle = std::function<int(const Trajectory&, const Trajectory&, Rng&)>;

}  // namespace pbrl
