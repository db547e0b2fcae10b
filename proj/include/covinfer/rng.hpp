#ifndef COVINFER_RNG_HPP
#define COVINFER_RNG_HPP

#include <cassert>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace covinfer {

/// Deterministic random source. Every stochastic operation in the library
/// takes an explicitly passed Rng, never ambient randomness, so a run is
/// reproducible from its seed alone. Bounded draws use rejection sampling
/// rather than std::uniform_int_distribution, whose output is
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform draw from [0, n). n == 1 consumes no entropy.
  std::size_t below(std::size_t n) {
    assert(n > 0);
    if (n <= 1) return 0;
    const std::uint64_t span = static_cast<std::uint64_t>(n);
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % span;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return static_cast<std::size_t>(draw % span);
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

  /// Fisher-Yates, unbiased given below().
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace covinfer

#endif
