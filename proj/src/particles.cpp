#include "sald/particles.hpp"

#include "sald/errors.hpp"

namespace sald {

ParticleEnsemble standard_normal_ensemble(std::size_t n, rng::Lineage lineage) {
    ParticleEnsemble out;
    out.lineage = lineage;
    out.positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.positions[i] = lineage.stream(i, 0, rng::Tag::Init).normal2();
    }
    return out;
}

Vec2 sample_mean(const std::vector<Vec2>& points) {
    if (points.empty()) throw ConfigError("sample_mean of an empty set");
    Vec2 sum;
    for (const Vec2& p : points) sum += p;
    return sum / static_cast<double>(points.size());
}

Vec2 sample_variance(const std::vector<Vec2>& points) {
    if (points.size() < 2) throw ConfigError("sample_variance needs at least two points");
    const Vec2 mean = sample_mean(points);
    Vec2 acc;
    for (const Vec2& p : points) {
        const Vec2 d = p - mean;
        acc += Vec2{d.x * d.x, d.y * d.y};
    }
    return acc / static_cast<double>(points.size() - 1);
}

}  // namespace sald
