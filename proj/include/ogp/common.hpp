#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ogp {

struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// child stream of a seed; tags separate independent uses
inline uint64_t derive_seed(uint64_t seed, uint64_t tag) {
    return splitmix64(splitmix64(seed) ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t seed, uint64_t tag = 0) { return Rng(derive_seed(seed, tag)); }

// uniform in [0,1) from the top 53 bits
inline double word_to_unit(uint64_t w) { return double(w >> 11) * 0x1.0p-53; }

inline uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
    auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

struct Interval {
    double lo = 0, hi = 0;
};

// Wilson score interval for a binomial proportion
inline Interval wilson_interval(uint64_t successes, uint64_t trials, double z = 1.96) {
    if (trials == 0) return {0, 1};
    double n = double(trials), p = successes / n, z2 = z * z;
    double center = (p + z2 / (2 * n)) / (1 + z2 / n);
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (successes == 0) ci.lo = 0;
    if (successes == trials) ci.hi = 1;
    return ci;
}

// worker count honoring OGP_LAB_THREADS
int thread_cap();
void apply_thread_cap();

}  // namespace ogp
