#pragma once

#include <cstdint>
#include <random>

namespace fairglvq::detail {

// Independent, reproducible generator per (seed, stream) pair. Separate
// streams keep e.g. batch sampling unaffected by pseudo-class tie draws.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

enum Stream : std::uint64_t {
    kGenerator = 1,
    kFolds = 2,
    kKMeans = 3,
    kPerturbation = 4,
    kBatches = 5,
    kPseudo = 6,
};

}  // namespace fairglvq::detail
