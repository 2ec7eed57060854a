#include "sald/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "sald/errors.hpp"

namespace sald {

void GaussianMixture::validate() const {
    if (means.empty() || weights.size() != means.size()) {
        throw ConfigError("mixture needs one weight per component");
    }
    if (!(component_var > 0.0)) throw ConfigError("mixture component variance must be positive");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ConfigError("mixture weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
}

GaussianMixture single_gaussian(Vec2 mean, double var) { return {{1.0}, {mean}, var}; }

GaussianMixture two_gaussian(double offset, double var) {
    return {{0.5, 0.5}, {{-offset, 0.0}, {offset, 0.0}}, var};
}

GaussianMixture eight_gaussian(double radius, double var) {
    GaussianMixture m;
    m.component_var = var;
    for (int j = 0; j < 8; ++j) {
        const double angle = std::numbers::pi / 8.0 + 2.0 * std::numbers::pi * j / 8.0;
        m.means.push_back({radius * std::cos(angle), radius * std::sin(angle)});
        m.weights.push_back(1.0 / 8.0);
    }
    return m;
}

// ---------------------------------------------------------------------------

MixtureSnapshot::MixtureSnapshot(const GaussianMixture& data, double mean_scale, double var)
    : var_(var), half_precision_(0.5 / var), log_norm_(-std::log(2.0 * std::numbers::pi * var)) {
    means_.reserve(data.size());
    log_weights_.reserve(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
        means_.push_back(mean_scale * data.means[j]);
        log_weights_.push_back(std::log(data.weights[j]));
    }
}

double MixtureSnapshot::logit(std::size_t j, Vec2 x) const {
    return log_weights_[j] - squared_norm(x - means_[j]) * half_precision_;
}

double MixtureSnapshot::log_density(Vec2 x) const {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < means_.size(); ++j) top = std::max(top, logit(j, x));
    double sum = 0.0;
    for (std::size_t j = 0; j < means_.size(); ++j) sum += std::exp(logit(j, x) - top);
    return log_norm_ + top + std::log(sum);
}

Vec2 MixtureSnapshot::mixture_score(Vec2 x) const {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < means_.size(); ++j) top = std::max(top, logit(j, x));
    double total = 0.0;
    Vec2 weighted_mean;
    for (std::size_t j = 0; j < means_.size(); ++j) {
        const double w = std::exp(logit(j, x) - top);
        total += w;
        weighted_mean += w * means_[j];
    }
    return (weighted_mean / total - x) / var_;
}

std::vector<double> MixtureSnapshot::responsibilities(Vec2 x) const {
    std::vector<double> out(means_.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < means_.size(); ++j) {
        out[j] = logit(j, x);
        top = std::max(top, out[j]);
    }
    double total = 0.0;
    for (double& w : out) {
        w = std::exp(w - top);
        total += w;
    }
    for (double& w : out) w /= total;
    return out;
}

Vec2 MixtureSnapshot::responsibility_weighted(Vec2 x, const std::vector<Vec2>& vectors) const {
    if (means_.size() == 1) return vectors[0];
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < means_.size(); ++j) top = std::max(top, logit(j, x));
    double total = 0.0;
    Vec2 acc;
    for (std::size_t j = 0; j < means_.size(); ++j) {
        const double w = std::exp(logit(j, x) - top);
        total += w;
        acc += w * vectors[j];
    }
    return acc / total;
}

// ---------------------------------------------------------------------------

MixtureSnapshot VpMarginalFamily::at(double t) const {
    if (!(t >= 0.0) || t > horizon() * (1.0 + 1e-15)) {
        throw DomainError("t=" + std::to_string(t) + " outside [0, T]");
    }
    const auto c = vp_coefficients(schedule, std::max(0.0, horizon() - t));
    return MixtureSnapshot(data, c.decay, c.decay * c.decay * data.component_var + c.noise_var);
}

double VpMarginalFamily::reverse_beta(double t) const {
    if (!(t >= 0.0) || t > horizon() * (1.0 + 1e-15)) {
        throw DomainError("t=" + std::to_string(t) + " outside [0, T]");
    }
    return beta_at(schedule, std::max(0.0, horizon() - t));
}

double marginal_log_density(const VpMarginalFamily& family, double t, Vec2 x) {
    return family.at(t).log_density(x);
}

Vec2 marginal_score(const VpMarginalFamily& family, double t, Vec2 x) {
    return family.at(t).score(x);
}

Vec2 reverse_velocity_vp(const VpMarginalFamily& family, double t, Vec2 x) {
    return 0.5 * family.reverse_beta(t) * (x + family.at(t).score(x));
}

// ---------------------------------------------------------------------------

void FlowMarginalFamily::validate() const {
    data.validate();
    if (!(source_std > 0.0)) throw ConfigError("flow source std must be positive");
}

MixtureSnapshot FlowMarginalFamily::at(double tau) const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("flow time outside [0, 1]");
    const double keep = 1.0 - tau;
    return MixtureSnapshot(data, keep,
                           keep * keep * data.component_var + tau * tau * source_std * source_std);
}

double flow_log_density(const FlowMarginalFamily& family, double tau, Vec2 x) {
    return family.at(tau).log_density(x);
}

Vec2 flow_score(const FlowMarginalFamily& family, double tau, Vec2 x) {
    return family.at(tau).score(x);
}

Vec2 flow_velocity(const FlowMarginalFamily& family, double tau, Vec2 x) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw DomainError("flow_velocity needs 0 < tau < 1, got " + std::to_string(tau));
    }
    const double s0_sq = family.source_std * family.source_std;
    return -(x + tau * s0_sq * flow_score(family, tau, x)) / (1.0 - tau);
}

Vec2 flow_velocity_posterior(const FlowMarginalFamily& family, double tau, Vec2 x) {
    return flow_velocity_posterior(family, family.at(tau), tau, x);
}

Vec2 flow_velocity_posterior(const FlowMarginalFamily& family, const MixtureSnapshot& snapshot,
                             double tau, Vec2 x) {
    const double keep = 1.0 - tau;
    const double s0_sq = family.source_std * family.source_std;
    // Per component: E[s0 Z - X_data | x, j] = -c_j + gain (x - keep c_j). The gain
    // is shared, so only the responsibility-weighted data mean is needed.
    const double gain = (tau * s0_sq - keep * family.data.component_var) / snapshot.variance();
    const Vec2 data_mean = snapshot.responsibility_weighted(x, family.data.means);
    return gain * x - (1.0 + gain * keep) * data_mean;
}

// ---------------------------------------------------------------------------

ParticleEnsemble sample_data(const GaussianMixture& mixture, std::size_t n, rng::Lineage lineage) {
    mixture.validate();
    if (n == 0) throw ConfigError("sample_data needs n >= 1");
    std::vector<double> cumulative(mixture.weights.size());
    std::partial_sum(mixture.weights.begin(), mixture.weights.end(), cumulative.begin());
    const double sd = std::sqrt(mixture.component_var);

    ParticleEnsemble out;
    out.lineage = lineage;
    out.positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto stream = lineage.stream(i, 0, rng::Tag::Data);
        const double u = stream.uniform() * cumulative.back();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t j = std::min<std::size_t>(it - cumulative.begin(), mixture.size() - 1);
        out.positions[i] = mixture.means[j] + sd * stream.normal2();
    }
    return out;
}

// ---------------------------------------------------------------------------

void GridSpec::validate() const {
    if (!(x_hi > x_lo) || !(y_hi > y_lo)) throw ConfigError("grid ranges must be non-empty");
    if (nx < 1 || ny < 1) throw ConfigError("grid needs at least one cell per axis");
}

Vec2 GridSpec::cell_center(std::size_t i, std::size_t j) const {
    return {x_lo + (static_cast<double>(i) + 0.5) * cell_width(),
            y_lo + (static_cast<double>(j) + 0.5) * cell_height()};
}

std::size_t GridSpec::clamped_cell(Vec2 x) const {
    const double fi = std::floor((x.x - x_lo) / cell_width());
    const double fj = std::floor((x.y - y_lo) / cell_height());
    const auto i = static_cast<std::size_t>(std::clamp(fi, 0.0, static_cast<double>(nx - 1)));
    const auto j = static_cast<std::size_t>(std::clamp(fj, 0.0, static_cast<double>(ny - 1)));
    return j * nx + i;
}

double GridDensity::total_mass() const {
    return std::accumulate(values.begin(), values.end(), 0.0) * cell_area();
}

double GridDensity::mass_within(Vec2 center, double radius) const {
    double mass = 0.0;
    for (std::size_t j = 0; j < grid.ny; ++j) {
        for (std::size_t i = 0; i < grid.nx; ++i) {
            if (norm(grid.cell_center(i, j) - center) <= radius) mass += values[j * grid.nx + i];
        }
    }
    return mass * cell_area();
}

GridDensity guided_target_grid(const MixtureSnapshot& base, const Guide* guide, const GridSpec& grid,
                               double guidance_scale) {
    grid.validate();
    GridDensity out{grid, std::vector<double>(grid.cells())};
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.ny; ++j) {
        for (std::size_t i = 0; i < grid.nx; ++i) {
            const Vec2 x = grid.cell_center(i, j);
            double log_value = base.log_density(x);
            if (guide != nullptr && guidance_scale != 0.0) {
                const double f = guide->value(x);
                if (!std::isfinite(f)) {
                    throw NumericalError("non-finite guide value at grid cell (" + std::to_string(i) +
                                         ", " + std::to_string(j) + ")");
                }
                log_value -= guidance_scale * f;
            }
            out.values[j * grid.nx + i] = log_value;
            top = std::max(top, log_value);
        }
    }
    double total = 0.0;
    for (double& v : out.values) {
        v = std::exp(v - top);
        total += v;
    }
    const double scale = 1.0 / (total * grid.cell_area());
    for (double& v : out.values) v *= scale;
    return out;
}

GridDensity guided_target_grid(const VpMarginalFamily& family, double t, const Guide* guide,
                               const GridSpec& grid, double guidance_scale) {
    return guided_target_grid(family.at(t), guide, grid, guidance_scale);
}

void write_grid_csv(std::ostream& out, const GridDensity& density) {
    const auto old_precision = out.precision(17);
    out << "x,y,density\n";
    for (std::size_t j = 0; j < density.grid.ny; ++j) {
        for (std::size_t i = 0; i < density.grid.nx; ++i) {
            const Vec2 c = density.grid.cell_center(i, j);
            out << c.x << ',' << c.y << ',' << density.values[j * density.grid.nx + i] << '\n';
        }
    }
    out.precision(old_precision);
}

}  // namespace sald
