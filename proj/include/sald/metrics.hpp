#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "sald/guide.hpp"
#include "sald/rng.hpp"
#include "sald/targets.hpp"
#include "sald/vec2.hpp"

namespace sald {

inline constexpr double kDefaultSmoothingEps = 1e-10;

struct KlEstimate {
    double value = 0.0;
    std::size_t n_particles = 0;
    double smoothing_eps = kDefaultSmoothingEps;
    GridSpec grid;
};

// Per-cell particle counts; particles outside the grid land in the nearest
// boundary cell. Chunk histograms are merged in chunk order.
std::vector<std::uint64_t> grid_histogram(const std::vector<Vec2>& particles, const GridSpec& grid,
                                          unsigned threads = 1);

// Discrete KL(h || pi) between the eps-smoothed particle histogram and the
// target's cell probabilities, both renormalized on the target's grid.
KlEstimate kl_grid(const std::vector<Vec2>& particles, const GridDensity& target,
                   double smoothing_eps = kDefaultSmoothingEps, unsigned threads = 1);

// KL(N(m1, v1 I) || N(m2, v2 I)) in dimension m1.size().
double gaussian_kl(const std::vector<double>& mean1, double var1, const std::vector<double>& mean2,
                   double var2);

// Average of the unscaled guide value; 0 for a null guide.
double mean_penalty(const std::vector<Vec2>& particles, const Guide* guide);

struct ComplexityEstimate {
    double alpha = 0.0;
    double value = 0.0;
    std::size_t n_samples = 0;
    double std_error = 0.0;
};

using VectorField = std::function<Vec2(Vec2)>;
using TimeVectorField = std::function<Vec2(double, Vec2)>;

// (1/alpha) log mean exp(alpha q_i) over precomputed squared norms q_i.
ComplexityEstimate alpha_complexity(const std::vector<double>& squared_norms, double alpha);
ComplexityEstimate alpha_complexity(const std::vector<Vec2>& samples, const VectorField& field,
                                    double alpha);

// Inverse-CDF draws from a grid density: cell by cumulative mass, then uniform
// within the cell. Sample i uses stream (i, step, Diagnostic).
std::vector<Vec2> sample_grid_density(const GridDensity& density, std::size_t n,
                                      rng::Lineage lineage, std::uint64_t step = 0);

// `nodes` equally spaced times covering [0, horizon].
std::vector<double> uniform_time_grid(double horizon, std::size_t nodes = 21);

struct PathSampling {
    std::size_t samples_per_node = 20000;
    GridSpec grid;
    rng::Lineage lineage;
};

// Trapezoid rule over t_grid of alpha_complexity(pi_t, field(t, .)), with pi_t
// ∝ p_t exp(-c f) drawn by sample_grid_density (node j uses step j).
double path_complexity(const VpMarginalFamily& family, const Guide* guide, double guidance_scale,
                       const TimeVectorField& field, double alpha, const std::vector<double>& t_grid,
                       const PathSampling& sampling);

struct VarianceEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

// Monte Carlo Var over pi_t of g_t = c grad f . u_t for a static guide.
VarianceEstimate residual_variance(const VpMarginalFamily& family, const Guide& guide,
                                   double guidance_scale, const TimeVectorField& velocity, double t,
                                   std::size_t n_samples, rng::Lineage lineage,
                                   const GridSpec& grid = {});

// Unbiased variance of values with the standard error of that estimate.
VarianceEstimate sample_variance_with_error(const std::vector<double>& values);

}  // namespace sald
