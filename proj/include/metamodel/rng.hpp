#pragma once

#include <cstdint>

namespace metamodel {

/// SplitMix64 output function.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based uniform stream. The value for (step, agent, slot) depends
/// only on those coordinates and the seed, so simulations are reproducible
/// on every platform and independent of evaluation order. Uniforms are the
/// top 53 bits scaled into [0, 1).
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : key_(splitmix64(seed)) {}

  constexpr std::uint64_t bits(std::uint64_t step, std::uint64_t agent, std::uint64_t slot) const {
    std::uint64_t h = splitmix64(key_ ^ step);
    h = splitmix64(h ^ agent);
    return splitmix64(h ^ slot);
  }

  constexpr double uniform(std::uint64_t step, std::uint64_t agent, std::uint64_t slot) const {
    return static_cast<double>(bits(step, agent, slot) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

}  // namespace metamodel
