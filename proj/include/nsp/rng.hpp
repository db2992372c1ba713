#pragma once

#include <cstdint>
#include <random>

namespace nsp {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-trial / per-image
// streams from one base seed so results do not depend on scheduling.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(mix_seed(base ^ mix_seed(a)) ^ mix_seed(b + 0x5851f42d4c957f2dULL));
}

}  // namespace nsp
