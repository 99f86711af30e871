#pragma once

// Counter-based randomness: every draw is a pure function of (seed, stream, counter),
// so draws can be taken in any order and on any thread with identical results.

#include <cstdint>
#include <string_view>

namespace psynth::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
    return mix(a ^ (mix(b) + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

/// FNV-1a, for folding labels into keys.
constexpr std::uint64_t hash_label(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) noexcept {
    return combine(combine(seed, stream), counter);
}

/// Uniform in [0, 1) with 53 random bits.
constexpr double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
    return static_cast<double>(bits(seed, stream, counter) >> 11) * 0x1.0p-53;
}

} // namespace psynth::rng
