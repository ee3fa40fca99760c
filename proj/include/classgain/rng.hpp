#pragma once

#include <cstdint>
#include <cmath>
#include <span>
#include <vector>

namespace classgain {

// Deterministic, platform-independent generator (xoshiro256++ core,
// splitmix64 seeding). The standard library engines are portable but the
// <random> distributions are not, so all draws are implemented here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
        cached_normal_ = false;
        cache_ = 0.0;
    }

    // Independent stream for (seed, index), used for parallel trials.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        std::uint64_t mix = a ^ (index + 0x9e3779b97f4a7c15ULL);
        return Rng(splitmix64(mix));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Rejection keeps the draw unbiased.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Standard normal via the Marsaglia polar method.
    double normal() {
        if (cached_normal_) {
            cached_normal_ = false;
            return cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        cache_ = v * f;
        cached_normal_ = true;
        return u * f;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Exponential(1), used for Dirichlet rows.
    double exponential() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -std::log(u);
    }

    // Dirichlet(1,...,1): uniform draw from the probability simplex.
    void dirichlet_row(std::span<double> out) {
        double total = 0.0;
        for (auto& v : out) {
            v = exponential();
            total += v;
        }
        for (auto& v : out) v /= total;
    }

    // Categorical draw from probabilities summing to ~1; the final class
    // absorbs rounding slack.
    std::size_t categorical(std::span<const double> probs) {
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

    // One-shot avalanche mix, for deriving decorrelated seeds.
    static std::uint64_t hash(std::uint64_t v) {
        std::uint64_t s = v;
        return splitmix64(s);
    }

    static std::uint64_t splitmix64(std::uint64_t& state) {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double cache_;
    bool cached_normal_;
};

}  // namespace classgain
