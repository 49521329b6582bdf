#ifndef SPIKEQ_RNG_HPP
#define SPIKEQ_RNG_HPP

#include <cstdint>
#include <random>

namespace spikeq {

/// Purposes that get their own random stream below a master seed.
enum class Stream : std::uint32_t {
  Data = 1,
  Noise = 2,
  Init = 3,
  Validation = 4,
};

using Rng = std::mt19937_64;

/// Derives an independent generator from (master seed, purpose, index...).
/// The derivation goes through std::seed_seq, whose mixing is fully specified,
/// so a given tuple maps to the same stream on every platform.
inline Rng make_rng(std::uint64_t master, Stream purpose, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform double in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace spikeq

#endif  // SPIKEQ_RNG_HPP
