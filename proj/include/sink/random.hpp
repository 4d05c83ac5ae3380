#pragma once

#include <cstdint>
#include <random>

namespace sink {

using Rng = std::mt19937_64;

// Independent stream `stream` derived from a base seed. Used for
// per-replication, per-restart and per-worker sub-seeds.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5151u};
    return Rng(seq);
}

}  // namespace sink
