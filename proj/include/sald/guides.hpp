#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sald/guide.hpp"
#include "sald/rng.hpp"
#include "sald/targets.hpp"
#include "sald/vec2.hpp"

namespace sald {

// f(x) = 1/(lambda N) sum_j ||x - y_j||. A reference point coinciding with x
// contributes the zero vector to the gradient.
class PointCloudGuide final : public Guide {
public:
    PointCloudGuide(std::vector<Vec2> reference_points, double lambda);

    double value(Vec2 x) const override;
    Vec2 grad(Vec2 x) const override;

    const std::vector<Vec2>& reference_points() const { return points_; }
    double lambda() const { return lambda_; }

private:
    std::vector<Vec2> points_;
    double lambda_;
};

// f(x) = lambda sum_{c in P} exp(-||x - c||^2 / (2 l^2)).
class ModePenaltyGuide final : public Guide {
public:
    ModePenaltyGuide(std::vector<Vec2> penalized_centers, double lambda, double length_scale);

    double value(Vec2 x) const override;
    Vec2 grad(Vec2 x) const override;

    const std::vector<Vec2>& centers() const { return centers_; }

private:
    std::vector<Vec2> centers_;
    double lambda_;
    double length_scale_;
};

// f(x) = 1/2 weight ||x - center||^2.
class QuadraticGuide final : public Guide {
public:
    QuadraticGuide(Vec2 center, double weight) : center_(center), weight_(weight) {}

    double value(Vec2 x) const override { return 0.5 * weight_ * squared_norm(x - center_); }
    Vec2 grad(Vec2 x) const override { return weight_ * (x - center_); }

private:
    Vec2 center_;
    double weight_;
};

// Guide values and gradients tabulated on the nodes of a grid and interpolated
// bilinearly. Queries outside the grid are clamped onto its boundary.
class BilinearGuideCache final : public Guide {
public:
    struct Node {
        double f;
        Vec2 grad;
    };

    // `nodes` uses nx x ny grid *nodes* spanning the closed rectangle.
    BilinearGuideCache(const Guide& guide, const GridSpec& nodes);

    double value(Vec2 x) const override;
    Vec2 grad(Vec2 x) const override;

    const GridSpec& nodes() const { return grid_; }
    Vec2 node_position(std::size_t i, std::size_t j) const;
    const Node& node(std::size_t i, std::size_t j) const { return table_[j * grid_.nx + i]; }

private:
    Node interpolate(Vec2 x) const;

    GridSpec grid_;
    double hx_;
    double hy_;
    std::vector<Node> table_;
};

// The modes whose first coordinate is negative.
std::vector<Vec2> left_half_centers(const GaussianMixture& mixture);

struct TwoMoonsParams {
    std::size_t n_points = 2000;
    double noise = 0.05;
    double scale = 2.0;
    std::uint64_t seed = 20240611;
};

// Interleaved half circles (outer: (cos a, sin a); inner: (1 - cos a, 0.5 - sin a),
// a on a uniform grid of [0, pi]) with Gaussian jitter, recentred at the origin
// and scaled.
std::vector<Vec2> two_moons_cloud(const TwoMoonsParams& params);

// Two-column CSV (x,y); a non-numeric first line is treated as a header.
std::vector<Vec2> read_points_csv(std::istream& in);
void write_points_csv(std::ostream& out, const std::vector<Vec2>& points);
// x,y,f,grad_x,grad_y at every node.
void write_cache_csv(std::ostream& out, const BilinearGuideCache& cache);

// Zeroth-order estimator of the Gaussian-smoothed gradient of a black-box f.
struct ZoEstimatorConfig {
    std::size_t batch_size = 32;
    double smoothing = 0.1;
    bool normalize = true;

    void validate() const;
};

struct ZoEstimate {
    Vec2 gradient;
    // Per-coordinate standard error of the batch mean.
    Vec2 std_error;
};

using Reward = std::function<double(Vec2)>;

inline constexpr double kRewardStdFloor = 1e-12;

// (1 / (N sigma)) sum_i f(x + sigma eps_i) eps_i with eps_i ~ N(0, I) drawn from
// `stream`; rewards are standardized by the batch mean and std when
// cfg.normalize is set.
ZoEstimate zo_gradient_with_error(const Reward& f, Vec2 x, const ZoEstimatorConfig& cfg,
                                  rng::Stream& stream);
Vec2 zo_gradient(const Reward& f, Vec2 x, const ZoEstimatorConfig& cfg, rng::Stream& stream);

}  // namespace sald
