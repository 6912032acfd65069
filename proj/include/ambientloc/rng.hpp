#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "ambientloc/error.hpp"
#include "ambientloc/util.hpp"

namespace ambientloc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Stable subsystem seed: hash of (master seed, name, indices). All toolkit
/// randomness flows from one master seed through this function.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name,
                                 std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t h = fnv1a64(name, master ^ 0x9e3779b97f4a7c15ull);
    h ^= a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h = fnv1a64("·", h);
    h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h = fnv1a64("·", h);
    h ^= c + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    std::uint64_t state = h;
    return splitmix64(state);
}

/// Deterministic random stream. The engine is the standard-pinned
/// mt19937_64; the double/normal mappings are fixed here rather than taken
/// from std distributions, so sampled values are identical on every
/// platform and library version.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Standard normal via Box-Muller (no cached spare; fully stateless
    /// apart from the engine position).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sigma) {
        return mean + sigma * normal();
    }

    /// Uniform integer in [0, n); rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        require(n > 0, "Rng::below: n must be positive");
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    /// k distinct indices drawn uniformly from [0, n), partial Fisher-Yates,
    /// returned in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        require(k <= n, "sample_without_replacement: k exceeds population");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i)
            pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
};

}
