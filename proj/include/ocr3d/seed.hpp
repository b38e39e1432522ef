#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ocr3d {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Labeled substream seed: every random draw in a run descends from one global
/// seed through (label, index) pairs, so one integer reproduces everything.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t base, std::string_view label, std::uint64_t index = 0) {
  return Rng(derive_seed(base, label, index));
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by rejection, independent of the standard library's
/// distribution implementation.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

}  // namespace ocr3d
