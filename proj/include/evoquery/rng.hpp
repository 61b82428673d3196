#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace evoquery {

// Deterministic PRNG (xoshiro256**) with keyed substream derivation.
//
// std::mt19937 is portable but the standard distributions are not, so all
// draws are implemented here with fixed-width arithmetic: identical seeds
// produce identical streams on every platform and under any worker count.
//
// Substreams are derived from the stream's key, not from its evolving
// state, so `substream("mutate", gen, i)` is stable no matter how many
// draws the parent has made.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Unbiased integer in [0, n). n == 0 or 1 returns 0 without consuming
    // any state.
    std::uint64_t below(std::uint64_t n);

    // Uniform double in [0, 1), 53 bits of precision.
    double unit_double();

    bool coin();

    // Derived independent stream keyed by (parent key, tag, a, b).
    Rng substream(std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0) const;

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::array<std::uint64_t, 4> state_;
};

}  // namespace evoquery
