#ifndef MFBO_RNG_HPP
#define MFBO_RNG_HPP
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mfbo {

/// 64-bit finalizer from SplitMix64. Used for every seed derivation in the
/// project so that results do not depend on the standard library's engines.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

[[nodiscard]] constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept
{
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// FNV-1a over the bytes of a string.
[[nodiscard]] constexpr std::uint64_t hash_string(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform double in [0, 1) built from the top 53 bits of a hash value.
[[nodiscard]] constexpr double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based generator: the value at (seed, index, lane) never depends on
/// how many values were drawn before it, so a query's noise is a pure
/// function of its position in the run.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(mix64(seed)) {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t index, std::uint64_t lane = 0) const noexcept
    {
        return hash_combine(hash_combine(seed_, index), lane);
    }

    [[nodiscard]] double uniform(std::uint64_t index, std::uint64_t lane = 0) const noexcept
    {
        return to_unit(bits(index, lane));
    }

    /// Standard normal via Box-Muller on two lanes of the same index.
    [[nodiscard]] double normal(std::uint64_t index) const noexcept
    {
        const double u1 = 1.0 - uniform(index, 0); // (0, 1]
        const double u2 = uniform(index, 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

namespace detail {

inline constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                  41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

[[nodiscard]] inline double radical_inverse(std::uint64_t i, int base) noexcept
{
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
        i /= static_cast<std::uint64_t>(base);
        f *= inv;
    }
    return r;
}

} // namespace detail

/// Halton points in [0,1)^dim with a seeded Cranley-Patterson rotation.
/// Row i of the result is point i.
[[nodiscard]] inline Eigen::MatrixXd halton_unit(std::size_t n, int dim, std::uint64_t seed)
{
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), dim);
    const CounterRng rng(seed);
    std::vector<double> shift(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j)
        shift[static_cast<std::size_t>(j)] = seed == 0 ? 0.0 : rng.uniform(static_cast<std::uint64_t>(j), 7);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) {
            double v = detail::radical_inverse(i + 1, detail::kPrimes[j]) + shift[static_cast<std::size_t>(j)];
            pts(static_cast<Eigen::Index>(i), j) = v - std::floor(v);
        }
    }
    return pts;
}

} // namespace mfbo

#endif // MFBO_RNG_HPP
