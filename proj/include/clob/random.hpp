#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "clob/lattice.hpp"

namespace clob {

/// Independent generator for a (seed, stream...) tuple. Every random
/// consumer in the library derives its stream through here so that results
/// depend only on the master seed.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
    std::vector<std::uint32_t> words;
    words.push_back(static_cast<std::uint32_t>(seed));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    for (std::uint64_t s : stream) {
        words.push_back(static_cast<std::uint32_t>(s));
        words.push_back(static_cast<std::uint32_t>(s >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

/// 64-bit seed for a sub-task, e.g. one Monte Carlo replication.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
    Rng rng = make_rng(seed, stream);
    return rng();
}

}  // namespace clob
