#pragma once
#include <cstdint>

namespace mmabsax {

// Counter-based deterministic RNG. Every draw is a pure function of
// (seed, time step, player), so episodes are bit-reproducible across
// platforms and independent of evaluation order, and any (t, player)
// substream can be regenerated in isolation.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One 64-bit word for the (seed, t, player) cell. Two mixing rounds keep
// adjacent cells statistically unrelated.
inline std::uint64_t draw(std::uint64_t seed, std::uint64_t t, std::uint64_t player) {
    std::uint64_t k = splitmix64(seed ^ splitmix64(t));
    return splitmix64(k ^ splitmix64(player * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL));
}

// Uniform double in [0, 1) with 53 random bits.
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t t, std::uint64_t player) {
    return to_unit(draw(seed, t, player));
}

} // namespace rng
} // namespace mmabsax
