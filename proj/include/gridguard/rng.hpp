#pragma once

#include <cstdint>
#include <random>

namespace gridguard {

// splitmix64 finalizer; derives independent sub-seeds from (state, salt).
inline uint64_t mix_seed(uint64_t state, uint64_t salt) {
    uint64_t z = state + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Bounded draw from a raw engine. std::uniform_int_distribution is not
// reproducible across standard libraries; modulo is, and bias is irrelevant
// at the sizes used here.
inline uint64_t draw_below(std::mt19937_64& eng, uint64_t n) {
    return eng() % n;
}

}  // namespace gridguard
