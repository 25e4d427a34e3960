#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "parkcast/error.hpp"

namespace parkcast {

// Deterministic random source. The generator is mt19937_64 (bit-exact across
// platforms by standard); every transform on top of it is written out here
// instead of using std:: distributions, whose algorithms are
// implementation-defined. Same seed, same stream, everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0,1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        if (!(lo <= hi)) throw Error("Rng::uniform: lo > hi");
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n) by rejection, free of modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw Error("Rng::uniform_int: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; the spare deviate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double exponential(double rate) {
        if (!(rate > 0.0)) throw Error("Rng::exponential: rate must be positive");
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return -std::log(u) / rate;
    }

    // Knuth's product method; for large means the count is split so the
    // running product stays away from underflow.
    std::uint64_t poisson(double mean) {
        if (mean < 0.0) throw Error("Rng::poisson: mean must be non-negative");
        if (mean == 0.0) return 0;
        std::uint64_t total = 0;
        double remaining = mean;
        while (remaining > 30.0) {
            total += poisson_knuth(30.0);
            remaining -= 30.0;
        }
        return total + poisson_knuth(remaining);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = uniform_int(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    // Independent derived stream; mixes (seed, stream) with splitmix64 so
    // nearby seeds do not collide.
    Rng fork(std::uint64_t stream) const {
        std::uint64_t x = seed_ + 0x9E3779B97F4A7C15ull * (stream + 1);
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBull;
        x ^= x >> 31;
        return Rng(x);
    }

private:
    std::uint64_t poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace parkcast
