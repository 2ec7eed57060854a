#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "sald/vec2.hpp"

namespace sald::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline Counter philox_round(Counter c, Key k) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace detail

// Philox4x32-10 block function (Salmon et al., Random123).
inline Counter philox4x32(Counter ctr, Key key) {
    ctr = detail::philox_round(ctr, key);
    for (int i = 1; i < 10; ++i) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
        ctr = detail::philox_round(ctr, key);
    }
    return ctr;
}

// SplitMix64 finalizer; used to derive keys and per-run seeds.
std::uint64_t mix64(std::uint64_t z);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);
// Philox key for a base seed.
Key seed_key(std::uint64_t seed);

// Substream tags. Each (particle, step, tag) triple owns an independent stream,
// so adding a consumer under a new tag never perturbs existing trajectories.
enum class Tag : std::uint32_t {
    Init = 1,
    Noise = 2,
    Proposal = 3,
    Probe = 4,
    Data = 5,
    Diagnostic = 6,
    Cloud = 7,
    Test = 99,
};

// Counter-based stream addressed by (seed, index, step, tag). Each draw consumes
// one Philox block; the block counter occupies the last counter word.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t index, std::uint64_t step, Tag tag);
    // Hot-path form: key precomputed by seed_key, index and step already < 2^32.
    Stream(Key key, std::uint32_t index, std::uint32_t step, Tag tag)
        : key_(key), ctr_{index, step, static_cast<std::uint32_t>(tag), 0u} {}

    // Two independent standard normals (Box-Muller on one block).
    Vec2 normal2() {
        const Counter b = next_block();
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = static_cast<double>((detail::join(b[0], b[1]) >> 11) + 1) * 0x1p-53;
        const double u2 = static_cast<double>(detail::join(b[2], b[3]) >> 11) * 0x1p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }
    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        const Counter b = next_block();
        return static_cast<double>(detail::join(b[0], b[1]) >> 11) * 0x1p-53;
    }

private:
    Counter next_block() {
        const Counter out = philox4x32(ctr_, key_);
        ++ctr_[3];
        return out;
    }

    Key key_;
    Counter ctr_;
};

// Identifies the random lineage of a run: the base seed every stream is keyed on.
struct Lineage {
    std::uint64_t seed = 0;

    Stream stream(std::uint64_t index, std::uint64_t step, Tag tag) const {
        return Stream(seed, index, step, tag);
    }
    Key key() const { return seed_key(seed); }
};

}  // namespace sald::rng
