#pragma once

#include <cstdint>
#include <random>

namespace mrw {

// All stochastic code draws from MT19937-64. Independent streams for one
// logical seed are derived by passing (seed, stream) through SplitMix64, so
// parallel or repeated generation never shares state.
using Engine = std::mt19937_64;

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

[[nodiscard]] inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    return Engine{splitmix64(seed ^ splitmix64(stream))};
}

}  // namespace mrw
