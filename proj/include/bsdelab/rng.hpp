#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bsde::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stateless stream keyed by (seed, stream, counter): the value depends only
/// on the key, never on call order, so parallel draws are reproducible.
class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t seed) noexcept : seed_(mix(seed)) {}

    constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
        return mix(mix(seed_ ^ mix(stream)) + counter);
    }

    /// Uniform on (0, 1), never 0.
    double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
        return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by Box-Muller on two uniforms drawn at 2c and 2c + 1.
    double normal(std::uint64_t stream, std::uint64_t counter) const noexcept {
        const double u1 = uniform(stream, 2 * counter);
        const double u2 = uniform(stream, 2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Fair coin.
    bool coin(std::uint64_t stream, std::uint64_t counter) const noexcept {
        return (bits(stream, counter) >> 63) != 0;
    }

private:
    std::uint64_t seed_;
};

}  // namespace bsde::rng
