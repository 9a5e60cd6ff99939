#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cgap/error.hpp"

namespace cgap {

// Deterministic RNG. All distributions are hand-mapped from raw mt19937_64
// output because the std:: distribution objects are implementation-defined
// and would break byte-identical reruns across standard libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // in [0, 1)
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, one draw per call (spare discarded).
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * M_PI * u2);
    }

    // Knuth's product method; fine for the small means used here.
    long long poisson(double lambda) {
        if (lambda < 0.0) throw error("poisson: negative mean");
        if (lambda == 0.0) return 0;
        double limit = std::exp(-lambda);
        long long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    // in [0, n)
    int below(int n) { return static_cast<int>(gen_() % static_cast<uint64_t>(n)); }

  private:
    std::mt19937_64 gen_;
};

// splitmix64; used to derive independent sub-stream seeds.
inline uint64_t mix_seed(uint64_t seed, uint64_t tag) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace cgap
