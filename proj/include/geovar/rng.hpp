#pragma once
// Deterministic splitmix64-based generator. All randomness in the project
// (candidate generation, property tests) goes through this so that runs are
// reproducible from a single recorded seed.

#include <cstdint>

namespace geovar {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // standard normal via Box-Muller (deterministic, no cached spare)
  double normal();

private:
  std::uint64_t state_;
};

}  // namespace geovar
