#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "sald/guide.hpp"
#include "sald/particles.hpp"
#include "sald/schedules.hpp"
#include "sald/vec2.hpp"

namespace sald {

// Isotropic Gaussian mixture in R^2 with a shared component variance.
struct GaussianMixture {
    std::vector<double> weights;
    std::vector<Vec2> means;
    double component_var = 1.0;

    void validate() const;
    std::size_t size() const { return means.size(); }
};

GaussianMixture single_gaussian(Vec2 mean, double var = 1.0);
// Equal-weight components at (+-offset, 0).
GaussianMixture two_gaussian(double offset = 2.25, double var = 1.0);
// Eight equal-weight components on a ring of the given radius, first angle pi/8.
GaussianMixture eight_gaussian(double radius = 3.0, double var = 1.0);

// Mixture with every component mean scaled by `mean_scale` and a common
// component variance; the evaluation kernel shared by all marginal families.
class MixtureSnapshot {
public:
    MixtureSnapshot(const GaussianMixture& data, double mean_scale, double var);

    double log_density(Vec2 x) const;
    Vec2 score(Vec2 x) const {
        if (means_.size() == 1) return (means_[0] - x) * (2.0 * half_precision_);
        return mixture_score(x);
    }
    // Component responsibilities at x (softmax of component log-densities).
    std::vector<double> responsibilities(Vec2 x) const;
    // sum_j responsibility_j(x) * vectors[j]; vectors.size() == number of components.
    Vec2 responsibility_weighted(Vec2 x, const std::vector<Vec2>& vectors) const;

    const std::vector<Vec2>& means() const { return means_; }
    const std::vector<double>& log_weights() const { return log_weights_; }
    double variance() const { return var_; }

private:
    double logit(std::size_t j, Vec2 x) const;
    Vec2 mixture_score(Vec2 x) const;

    std::vector<Vec2> means_;
    std::vector<double> log_weights_;
    double var_;
    double half_precision_;
    double log_norm_;
};

// Reverse-indexed VP marginals p_t = q_{T-t} of a Gaussian-mixture data law.
struct VpMarginalFamily {
    GaussianMixture data;
    BetaSchedule schedule;

    double horizon() const { return schedule.horizon; }
    // Mixture p_t (t in [0, T]).
    MixtureSnapshot at(double t) const;
    // beta(T - t), the reverse-time noise rate sigma_t^2.
    double reverse_beta(double t) const;
};

double marginal_log_density(const VpMarginalFamily& family, double t, Vec2 x);
Vec2 marginal_score(const VpMarginalFamily& family, double t, Vec2 x);
// u_t(x) = 1/2 beta(T - t) (x + grad log p_t(x)); generates (p_t) by continuity.
Vec2 reverse_velocity_vp(const VpMarginalFamily& family, double t, Vec2 x);

// Straight-line interpolation X_tau = (1 - tau) X_data + tau * source_std * Z.
// tau = 0 is the data law, tau = 1 the Gaussian source; the velocity field
// v_tau = E[source_std Z - X_data | X_tau] points from data toward noise.
struct FlowMarginalFamily {
    GaussianMixture data;
    double source_std = 1.0;

    void validate() const;
    MixtureSnapshot at(double tau) const;
};

double flow_log_density(const FlowMarginalFamily& family, double tau, Vec2 x);
Vec2 flow_score(const FlowMarginalFamily& family, double tau, Vec2 x);
// v_tau from the score identity v = -(x + tau s0^2 grad log p_tau) / (1 - tau).
// Throws DomainError unless 0 < tau < 1.
Vec2 flow_velocity(const FlowMarginalFamily& family, double tau, Vec2 x);
// The same field via per-component Gaussian conditioning; valid on [0, 1].
Vec2 flow_velocity_posterior(const FlowMarginalFamily& family, double tau, Vec2 x);
// Same, reusing a precomputed family.at(tau).
Vec2 flow_velocity_posterior(const FlowMarginalFamily& family, const MixtureSnapshot& snapshot,
                             double tau, Vec2 x);

// n i.i.d. draws from the mixture; particle i uses stream (i, 0, Data).
ParticleEnsemble sample_data(const GaussianMixture& mixture, std::size_t n, rng::Lineage lineage);

// Axis-aligned rectangle split into nx x ny cells (densities) or nodes (caches).
struct GridSpec {
    double x_lo = -8.0;
    double x_hi = 8.0;
    double y_lo = -8.0;
    double y_hi = 8.0;
    std::size_t nx = 256;
    std::size_t ny = 256;

    void validate() const;
    double cell_width() const { return (x_hi - x_lo) / static_cast<double>(nx); }
    double cell_height() const { return (y_hi - y_lo) / static_cast<double>(ny); }
    double cell_area() const { return cell_width() * cell_height(); }
    Vec2 cell_center(std::size_t i, std::size_t j) const;
    // Cell containing x; points outside map to the nearest boundary cell.
    std::size_t clamped_cell(Vec2 x) const;
    std::size_t cells() const { return nx * ny; }
};

// Piecewise-constant density on a grid; values[j * nx + i] is the density of
// cell (i, j) and sum(values) * cell_area == 1.
struct GridDensity {
    GridSpec grid;
    std::vector<double> values;

    double cell_area() const { return grid.cell_area(); }
    double total_mass() const;
    double probability(std::size_t cell) const { return values[cell] * cell_area(); }
    // Mass of cells whose centers lie within `radius` of `center`.
    double mass_within(Vec2 center, double radius) const;
};

// Cell values ∝ p(center) exp(-c f(center)), normalized by the Riemann sum.
// `guide` may be null (no tilt).
GridDensity guided_target_grid(const MixtureSnapshot& base, const Guide* guide, const GridSpec& grid,
                               double guidance_scale);
GridDensity guided_target_grid(const VpMarginalFamily& family, double t, const Guide* guide,
                               const GridSpec& grid, double guidance_scale);

// x,y,density rows at cell centers.
void write_grid_csv(std::ostream& out, const GridDensity& density);

}  // namespace sald
