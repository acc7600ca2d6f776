#pragma once

#include <cstdint>
#include <random>

namespace fidbench {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ (index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t component,
                                    std::uint64_t index) noexcept {
    return derive_seed(derive_seed(master, component), index);
}

// Stream ids for derive_seed(master, component, index). Values are part of the
// on-disk determinism contract; do not renumber.
namespace stream {
inline constexpr std::uint64_t scene = 1;
inline constexpr std::uint64_t region_perturbation = 11;
inline constexpr std::uint64_t faithfulness_correlation = 12;
inline constexpr std::uint64_t faithfulness_estimate = 13;
inline constexpr std::uint64_t infidelity = 14;
inline constexpr std::uint64_t premise_check = 21;
} // namespace stream

// mt19937_64 with portable draws; the std distributions are implementation
// defined and would break byte-identical reruns across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n). Lemire's multiply-shift with rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n <= 1) {
            return 0;
        }
        unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(engine_()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace fidbench
