#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace pbrl {

// Counter-based generator: a Weyl sequence hashed through splitmix64.
// Every stochastic operation in the library takes one of these explicitly;
// the same seed always yields the same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : counter_(seed) {}

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform over {0, ..., n-1}.
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    const int i = static_cast<int>(next_double() * n);
    return i < n ? i : n - 1;
  }

  int bernoulli(double p) { return next_double() < p ? 1 : 0; }

  // Index draw from a probability vector via a CDF walk. Entries must be
  // nonnegative and sum to ~1; floating-point residue falls on the last
  // positive entry.
  int categorical(std::span<const double> probs) {
    const double u = next_double();
    double acc = 0.0;
    int last_positive = -1;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      if (probs[i] <= 0.0) continue;
      last_positive = i;
      acc += probs[i];
      if (u < acc) return i;
    }
    if (last_positive < 0) throw std::invalid_argument("categorical: no positive mass");
    return last_positive;
  }

 private:
  std::uint64_t counter_;
};

}  // namespace pbrl
