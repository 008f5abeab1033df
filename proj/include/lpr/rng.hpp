#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace lpr {

// All randomness in the library flows through mt19937_64 plus the mappers
// below, so a (seed, stream) pair reproduces bit-identical sequences on any
// platform. Distribution classes from <random> are avoided on purpose: their
// output sequences are implementation-defined.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Independent stream for a named entity (scan id, landmark index, ...).
inline std::uint64_t derive_stream(std::uint64_t base_seed, std::uint64_t stream_id) {
    return splitmix64(base_seed ^ splitmix64(stream_id));
}

inline std::uint64_t derive_stream(std::uint64_t base_seed, const std::string& stream_name) {
    return derive_stream(base_seed, fnv1a64(stream_name));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, bound) by rejection; unbiased.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x > limit);
        return x % bound;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller; one value per call, the twin is discarded to keep the
    // consumption pattern independent of call sites.
    double next_normal(double mean, double sigma) {
        double u1;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * M_PI * u2);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

private:
    std::mt19937_64 gen_;
};

}  // namespace lpr
