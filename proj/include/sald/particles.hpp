#pragma once

#include <cstdint>
#include <vector>

#include "sald/rng.hpp"
#include "sald/vec2.hpp"

namespace sald {

// Sampler state: particle positions, the number of completed steps and the
// random lineage every per-particle stream is derived from.
struct ParticleEnsemble {
    std::vector<Vec2> positions;
    std::uint64_t step_index = 0;
    rng::Lineage lineage;

    std::size_t size() const { return positions.size(); }
};

// n i.i.d. standard normal points; streams (i, 0, Init).
ParticleEnsemble standard_normal_ensemble(std::size_t n, rng::Lineage lineage);

Vec2 sample_mean(const std::vector<Vec2>& points);
// Per-coordinate unbiased sample variance.
Vec2 sample_variance(const std::vector<Vec2>& points);

}  // namespace sald
