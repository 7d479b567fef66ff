#pragma once

#include <cstdint>

namespace occp {

// splitmix64: deterministic across platforms, unlike the standard library's
// distributions. Used everywhere a seeded choice is needed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound) via rejection sampling.
    uint64_t below(uint64_t bound) {
        if (bound <= 1) return 0;
        uint64_t limit = ~uint64_t(0) - (~uint64_t(0) % bound);
        for (;;) {
            uint64_t v = next();
            if (v < limit) return v % bound;
        }
    }

    static uint64_t mix(uint64_t a, uint64_t b) {
        Rng r(a ^ (b * 0x9e3779b97f4a7c15ull) ^ 0x5851f42d4c957f2dull);
        return r.next();
    }

private:
    uint64_t state_;
};

}  // namespace occp
