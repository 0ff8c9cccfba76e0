#pragma once

#include <cstdint>
#include <random>

namespace sift {

// Seeded RNG passed explicitly to every stochastic operation. The uniform
// mapping is done by hand (engine bits -> double) so that streams do not
// depend on libstdc++ distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(mix(seed)) {}

  // uniform double in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t integer(std::uint64_t n) { return eng_() % n; }

  std::uint64_t bits() { return eng_(); }

  // Independent substream; fork(k) with distinct k gives decorrelated
  // deterministic streams (per-example, per-epoch, per-step).
  Rng fork(std::uint64_t stream) const {
    return Rng(mix(seed_ ^ mix(stream + 0x9e3779b97f4a7c15ull)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

// Fisher-Yates with an explicit stream; std::shuffle's call pattern is
// implementation-defined.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.integer(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace sift
