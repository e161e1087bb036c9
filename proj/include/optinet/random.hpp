#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace optinet {

// Seeding and sampling conventions
// --------------------------------
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not, so every conversion below
// (uniform doubles, normals, bounded integers, shuffles) is implemented here
// to keep streams identical across standard libraries.
//
// Sub-seeds are derived with SplitMix64: derive_seed(master, {a, b, ...})
// folds each path element into the state as state = splitmix64(state ^ elem).

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by the Marsaglia polar method.
  double normal();

  /// Uniform integer in [0, bound), unbiased (bitmask rejection).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Fisher-Yates shuffle, back to front.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

std::vector<std::size_t> identity_permutation(std::size_t n);
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// m distinct indices from [0, n), in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t m, Rng& rng);

}  // namespace optinet
