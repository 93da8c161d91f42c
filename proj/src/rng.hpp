#pragma once

#include <cmath>
#include <cstdint>

namespace precess {

// splitmix64: tiny, seedable, and bit-identical on every platform, which the
// resume/determinism guarantees rely on (std::uniform_real_distribution is not).
struct rng {
    uint64_t state;

    explicit rng(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double u01() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    int sign() { return (next() & 1) ? 1 : -1; }

    // Box-Muller; consumes exactly two draws per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01(), u2 = u01();
        while (u1 <= 0.0) u1 = u01();
        double m = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = m * std::sin(a);
        have_spare_ = true;
        return m * std::cos(a);
    }

  private:
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Independent stream for task `idx` of a master seed.
inline uint64_t split_seed(uint64_t seed, uint64_t idx) {
    rng r(seed ^ (0xD6E8FEB86659FD93ull * (idx + 1)));
    return r.next();
}

} // namespace precess
