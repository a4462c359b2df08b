#pragma once

#include "adrift/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace adrift {

// All randomness in the library flows through these helpers so that a seed
// fully determines every output, independent of the standard library's
// distribution implementations.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a tag.
inline Seed derive_seed(Seed base, std::uint64_t tag) {
    std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    Index uniform_index(Index n) {
        return static_cast<Index>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via Box-Muller; one value per call, no cached state.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (Index i = static_cast<Index>(v.size()) - 1; i > 0; --i) {
            const Index j = uniform_index(i + 1);
            std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace adrift
