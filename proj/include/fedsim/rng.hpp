#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fedsim/errors.hpp"

namespace fedsim {

// splitmix64 finalizer; mixes one 64-bit word into another.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed derivation for independent streams, e.g.
// derive_seed(global_seed, client_id, round). Order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return derive_seed(derive_seed(a, b), c);
}

// Self-contained PRNG (splitmix64) so that identical seeds give identical
// streams regardless of standard-library version. All sampling below is
// written against this engine only; std::*_distribution is never used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw UsageError("Rng::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller (two fresh uniforms per call, no cache).
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double exponential(double rate) {
        const double u = 1.0 - uniform(); // (0, 1]
        return -std::log(u) / rate;
    }

    // Marsaglia-Tsang; shape > 0.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw UsageError("Rng::gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = 1.0 - uniform(); // (0, 1], keeps pow() positive
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Dirichlet(alpha, ..., alpha) over k categories.
    std::vector<double> dirichlet(double alpha, std::size_t k) {
        std::vector<double> w(k);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            w[i] = gamma(alpha);
            total += w[i];
        }
        while (total <= 0.0) { // all draws underflowed; redraw
            total = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                w[i] = gamma(alpha);
                total += w[i];
            }
        }
        for (auto& x : w) x /= total;
        return w;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i + 1));
            using std::swap;
            swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace fedsim
