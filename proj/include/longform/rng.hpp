#pragma once

#include <cstdint>

namespace longform {

// Counter-based pseudo-randomness: every draw is a pure hash of
// (seed, stream, item, draw), so consumers can pull draws in any order — or
// in parallel — and still reproduce identical values.

namespace detail {

inline std::uint64_t split_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t item,
                                  std::uint64_t draw) {
    std::uint64_t z = detail::split_mix(seed + 0x9E3779B97F4A7C15ULL);
    z = detail::split_mix(z ^ (stream + 0xD1B54A32D192ED03ULL));
    z = detail::split_mix(z ^ (item + 0x8CB92BA72F3D8DD7ULL));
    z = detail::split_mix(z ^ (draw + 0xEB44ACCAB455D165ULL));
    return z;
}

// Uniform double in [0, 1) with 53 bits of precision.
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t item,
                              std::uint64_t draw) {
    return static_cast<double>(counter_hash(seed, stream, item, draw) >> 11) * 0x1.0p-53;
}

}  // namespace longform
