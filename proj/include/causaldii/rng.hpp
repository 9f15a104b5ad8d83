#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace causaldii {

// SplitMix64 step. Used for seed derivation so that independent random
// streams can be split off a single master seed without overlap.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives a child seed from a master seed and a stream path such as
// {candidateIndex, permutationIndex}. Distinct paths give unrelated seeds;
// the same path always gives the same seed.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = master;
    (void)splitmix64_next(s);
    for (std::uint64_t p : path) {
        s ^= splitmix64_next(s) + p;
        (void)splitmix64_next(s);
    }
    return splitmix64_next(s);
}

// Deterministic random source. The generator is std::mt19937_64, whose output
// sequence is fixed by the standard, and all derived draws (uniforms, normals,
// bounded integers, shuffles) are implemented here rather than through
// std::normal_distribution or std::shuffle, whose algorithms are
// implementation-defined. Identical seeds therefore give identical streams on
// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller, caching the second draw of each pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // in (0, 1], keeps log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return static_cast<std::size_t>(r % bound);
        }
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace causaldii
