#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sigclass {

/// Counter-based generator: output i is a pure function of (key, i), so a
/// stream can be split into independent substreams without shared state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(mix(key ^ 0x6a09e667f3bcc909ULL)) {}

    /// Independent substream identified by `stream`.
    CounterRng split(std::uint64_t stream) const noexcept {
        CounterRng child(0);
        child.key_ = mix(key_ ^ mix(stream + 0x9e3779b97f4a7c15ULL));
        return child;
    }

    std::uint64_t next_u64() noexcept {
        return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
    }

    /// Uniform on (0, 1].
    double uniform_open_closed() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    double normal() noexcept {
        // Box-Muller keeps the stream identical across standard libraries.
        const double u1 = uniform_open_closed();
        const double u2 = uniform_open_closed();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n). Multiply-shift; bias is negligible for small n.
    std::uint64_t index(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace sigclass
