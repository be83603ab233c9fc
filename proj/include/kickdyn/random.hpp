#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace kickdyn {

/// SplitMix64 (Steele, Lea, Flood 2014). Used to expand seeds and to derive
/// per-realization seeds from a master seed.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    constexpr std::uint64_t operator()() noexcept
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// xoshiro256++ 1.0 (Blackman, Vigna). State is seeded from SplitMix64 so any
/// 64-bit seed, including zero, gives a valid non-zero state. Output is
/// identical on every platform.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256pp(std::uint64_t seed) noexcept
    {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm();
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double canonical() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Exponential variate with the given mean, by inverse CDF of canonical().
    double exponential(double mean) noexcept { return -mean * std::log1p(-canonical()); }

    const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

/// Seed of realization `index` under `master_seed`. Distinct indices give
/// distinct seeds because SplitMix64's output function is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept
{
    SplitMix64 sm(master_seed ^ 0x6a09e667f3bcc909ULL);
    const std::uint64_t base = sm();
    SplitMix64 mix(base + index * 0x9e3779b97f4a7c15ULL);
    return mix();
}

} // namespace kickdyn
