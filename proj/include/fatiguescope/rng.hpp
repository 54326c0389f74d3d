#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fatiguescope {

// Every stochastic component draws from std::mt19937_64, whose output
// sequence is fixed by the C++ standard. The standard library distributions
// are implementation-defined, so bounded integers, uniforms and normals are
// derived here to stay bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller (one value per call, no caching).
  double normal();

 private:
  std::mt19937_64 engine_;
};

// In-place Fisher-Yates shuffle (Durstenfeld variant, descending index).
template <typename T>
void fisher_yates_shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace fatiguescope
