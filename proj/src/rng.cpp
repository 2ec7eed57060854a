#include "sald/rng.hpp"

#include "sald/errors.hpp"

namespace sald::rng {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return mix64(mix64(base) ^ (salt * 0xD6E8FEB86659FD93ull));
}

Key seed_key(std::uint64_t seed) {
    const std::uint64_t k = mix64(seed);
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

Stream::Stream(std::uint64_t seed, std::uint64_t index, std::uint64_t step, Tag tag)
    : key_(seed_key(seed)) {
    if (index > 0xFFFFFFFFull || step > 0xFFFFFFFFull) {
        throw ConfigError("rng stream index/step exceeds 32 bits");
    }
    ctr_ = {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(step),
            static_cast<std::uint32_t>(tag), 0u};
}

}  // namespace sald::rng
