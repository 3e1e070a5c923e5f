#pragma once

#include <cstdint>
#include <random>

namespace exactlab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent child seeds from a
/// master seed so that parallel and sequential runs see the same streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
    return Rng(derive_seed(master, stream));
}

/// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

}  // namespace exactlab
