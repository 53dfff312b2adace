#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fedgame::rng {

// SplitMix64 finalizer; full avalanche on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Collapses (seed, id0, id1, ...) into one stream seed. Streams derived with
// different id tuples are independent of the order in which they are drawn
// from, which is what makes parallel simulation schedule-independent.
template <class... Ids>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Ids... ids) noexcept {
    std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ull);
    ((h = mix64(h ^ (static_cast<std::uint64_t>(ids) + 0x9E3779B97F4A7C15ull +
                     (h << 6) + (h >> 2)))),
     ...);
    return h;
}

// Deterministic random stream. The engine is std::mt19937_64 (fully specified
// by the standard); the distribution transforms are fixed here because the
// std::*_distribution algorithms are implementation-defined and would break
// bit-reproducibility across toolchains.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Unbiased integer in [0, n); rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Stream::below: n must be positive");
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Two independent N(0,1) draws (Box-Muller).
    std::pair<double, double> normal_pair() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

private:
    std::mt19937_64 engine_;
};

// Fisher-Yates shuffle driven by a Stream.
template <class T>
void shuffle(std::vector<T>& v, Stream& s) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[s.below(i)]);
    }
}

// Uniformly random `count`-subset of {0, ..., population-1}, ascending order.
inline std::vector<int> sample_indices(int population, int count, Stream& s) {
    if (count < 0 || count > population) {
        throw std::invalid_argument("sample_indices: count out of range");
    }
    std::vector<int> pool(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates: the first `count` slots end up a uniform subset.
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(s.below(static_cast<std::uint64_t>(population - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace fedgame::rng
