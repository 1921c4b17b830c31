#pragma once

#include <cmath>
#include <cstdint>
#include <iterator>
#include <random>
#include <string_view>

namespace hde {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from the run seed, a purpose tag and up
/// to two integer coordinates (e.g. architecture, fold). Every stochastic
/// stage of a run draws from its own derived stream, so results do not depend
/// on the order in which stages or folds execute.
constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view tag,
                                    std::uint64_t a = 0, std::uint64_t b = 0)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = mix64(run_seed ^ h);
    s = mix64(s ^ mix64(a + 0x1234567ULL));
    s = mix64(s ^ mix64(b + 0x89abcdefULL));
    return s;
}

inline Rng make_rng(std::uint64_t run_seed, std::string_view tag, std::uint64_t a = 0,
                    std::uint64_t b = 0)
{
    return Rng(derive_seed(run_seed, tag, a, b));
}

/// Uniform double in [0, 1) built from the top 53 bits; unlike
/// std::uniform_real_distribution its output is fixed by the engine alone.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller, engine-determined.
inline double standard_normal(Rng& rng)
{
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Uniform integer in [0, n), engine-determined (Lemire rejection).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n)
{
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

/// Fisher-Yates shuffle with engine-determined draws.
template <typename Range>
void shuffle(Range& range, Rng& rng)
{
    using std::swap;
    const auto n = static_cast<std::uint64_t>(std::size(range));
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_index(rng, i);
        swap(range[i - 1], range[j]);
    }
}

}  // namespace hde
