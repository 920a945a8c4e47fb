#pragma once

#include <cstdint>
#include <random>

namespace qspec {

// Counter-based seed derivation: every worker/restart/trial derives its own
// stream from (root seed, stream labels), so results do not depend on
// scheduling order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(root ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ (b + 0x3c6ef372fe94f82bULL));
    s = splitmix64(s ^ (c + 0xa54ff53a5f1d36f1ULL));
    return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

} // namespace qspec
