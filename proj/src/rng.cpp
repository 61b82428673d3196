#include "evoquery/rng.hpp"

#include "evoquery/util.hpp"

namespace evoquery {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
        word = splitmix64(s);
    }
}

std::uint64_t Rng::next_u64() {
    std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n <= 1) {
        return 0;
    }
    // Rejection sampling over the largest multiple of n.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double Rng::unit_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool Rng::coin() {
    return (next_u64() >> 63) != 0;
}

Rng Rng::substream(std::string_view tag, std::uint64_t a, std::uint64_t b) const {
    std::uint64_t mix = key_;
    mix ^= fnv1a64(tag);
    std::uint64_t s = mix;
    mix = splitmix64(s) ^ (a * 0x9e3779b97f4a7c15ULL);
    mix = splitmix64(mix) ^ (b * 0xc2b2ae3d27d4eb4fULL);
    std::uint64_t final_key = splitmix64(mix);
    return Rng(final_key);
}

}  // namespace evoquery
