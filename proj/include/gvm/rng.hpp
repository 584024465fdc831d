#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gvm {

using Engine = std::mt19937_64;

/// Independent sub-streams of one root seed. The numeric values are part of the
/// reproducibility contract: changing them changes every generated artifact.
enum class Stream : std::uint64_t {
    Graph = 1,
    TraderTypes = 2,
    InitialSpins = 3,
    Dynamics = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based split: child seed for index `counter` of `root`.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter)
{
    return splitmix64(splitmix64(root) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(std::uint64_t root, Stream stream)
{
    return Engine(derive_seed(root, static_cast<std::uint64_t>(stream)));
}

/// Uniform double in [0, 1) from the top 53 bits. Independent of the
/// standard library's distribution implementations.
inline double uniform01(Engine& eng)
{
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n)
{
    auto x = eng();
    auto m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = eng();
            m = static_cast<unsigned __int128>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

/// One engine draw split in two: an unbiased index in [0, n) from the high
/// 32 bits and a 32-bit uniform from the low bits. Requires n < 2^32.
struct IndexAndCoin {
    std::uint32_t index;
    std::uint32_t coin;
};

inline IndexAndCoin draw_index_and_coin(Engine& eng, std::uint32_t n)
{
    for (;;) {
        const auto x = eng();
        const std::uint64_t m = (x >> 32) * n;
        const auto low = static_cast<std::uint32_t>(m);
        if (low >= n || low >= (0u - n) % n)
            return {static_cast<std::uint32_t>(m >> 32), static_cast<std::uint32_t>(x)};
    }
}

/// Threshold t with P(coin < t) = p up to 2^-32; exact for p in {0, 1/2, 1}.
inline std::uint64_t coin_threshold(double p)
{
    if (p <= 0.0)
        return 0;
    if (p >= 1.0)
        return std::uint64_t{1} << 32;
    return static_cast<std::uint64_t>(std::llround(p * 0x1.0p32));
}

} // namespace gvm
