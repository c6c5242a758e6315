#pragma once

#include <cstdint>

namespace amoebot {

// splitmix64; used instead of <random> engines so that seeded results are
// bit-identical across standard library implementations.
struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    uint64_t below(uint64_t n) {
        return uint64_t((__uint128_t(next()) * n) >> 64);
    }
    double unit() { return double(next() >> 11) * 0x1.0p-53; }
};

}  // namespace amoebot
