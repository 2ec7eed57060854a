#include "sald/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sald/errors.hpp"
#include "sald/parallel.hpp"

namespace sald {

std::vector<std::uint64_t> grid_histogram(const std::vector<Vec2>& particles, const GridSpec& grid,
                                          unsigned threads) {
    grid.validate();
    WorkerPool pool(threads);
    std::vector<std::vector<std::uint64_t>> partial(pool.size());
    const std::size_t n = particles.size();
    const std::size_t chunk = (n + pool.size() - 1) / pool.size();
    // One histogram per chunk; the chunk index is recovered from `begin`.
    pool.run(n, [&](std::size_t begin, std::size_t end) {
        auto& counts = partial[chunk == 0 ? 0 : begin / chunk];
        counts.assign(grid.cells(), 0);
        for (std::size_t i = begin; i < end; ++i) ++counts[grid.clamped_cell(particles[i])];
    });
    std::vector<std::uint64_t> total(grid.cells(), 0);
    for (const auto& counts : partial) {
        if (counts.empty()) continue;
        for (std::size_t c = 0; c < total.size(); ++c) total[c] += counts[c];
    }
    return total;
}

KlEstimate kl_grid(const std::vector<Vec2>& particles, const GridDensity& target, double smoothing_eps,
                   unsigned threads) {
    if (particles.empty()) throw DomainError("kl_grid needs at least one particle");
    if (!(smoothing_eps > 0.0)) throw ConfigError("kl smoothing eps must be positive");
    if (target.values.size() != target.grid.cells()) throw ConfigError("target grid size mismatch");

    const auto counts = grid_histogram(particles, target.grid, threads);
    const double n = static_cast<double>(particles.size());
    const double h_total = 1.0 + smoothing_eps * static_cast<double>(counts.size());
    const double pi_total = std::accumulate(target.values.begin(), target.values.end(), 0.0);
    if (!(pi_total > 0.0)) throw DomainError("target grid carries no mass");

    double kl = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const double h = (static_cast<double>(counts[c]) / n + smoothing_eps) / h_total;
        const double p = target.values[c] / pi_total;
        if (!(p > 0.0)) {
            throw DomainError("target cell " + std::to_string(c) + " has zero mass; KL is infinite");
        }
        kl += h * std::log(h / p);
    }
    // Rounding can leave a tiny negative residue when h == pi.
    return {std::max(0.0, kl), particles.size(), smoothing_eps, target.grid};
}

double gaussian_kl(const std::vector<double>& mean1, double var1, const std::vector<double>& mean2,
                   double var2) {
    if (!(var1 > 0.0) || !(var2 > 0.0)) throw DomainError("gaussian_kl needs positive variances");
    if (mean1.size() != mean2.size() || mean1.empty()) {
        throw DomainError("gaussian_kl needs means of equal, non-zero dimension");
    }
    const double d = static_cast<double>(mean1.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < mean1.size(); ++i) dist += (mean1[i] - mean2[i]) * (mean1[i] - mean2[i]);
    const double ratio = var1 / var2;
    return 0.5 * (d * ratio + dist / var2 - d - d * std::log(ratio));
}

double mean_penalty(const std::vector<Vec2>& particles, const Guide* guide) {
    if (particles.empty()) throw DomainError("mean_penalty needs at least one particle");
    if (guide == nullptr) return 0.0;
    double sum = 0.0;
    for (const Vec2& x : particles) sum += guide->value(x);
    return sum / static_cast<double>(particles.size());
}

ComplexityEstimate alpha_complexity(const std::vector<double>& squared_norms, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    if (squared_norms.empty()) throw DomainError("alpha_complexity needs samples");
    double top = -std::numeric_limits<double>::infinity();
    for (double q : squared_norms) {
        if (!std::isfinite(q)) throw NumericalError("non-finite field value in alpha_complexity");
        top = std::max(top, alpha * q);
    }
    const double n = static_cast<double>(squared_norms.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double q : squared_norms) {
        const double e = std::exp(alpha * q - top);
        sum += e;
        sum_sq += e * e;
    }
    const double mean = sum / n;
    const double var = squared_norms.size() > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    ComplexityEstimate out;
    out.alpha = alpha;
    out.n_samples = squared_norms.size();
    out.value = (top + std::log(mean)) / alpha;
    // Delta method on log(mean).
    out.std_error = std::sqrt(var / n) / (alpha * mean);
    return out;
}

ComplexityEstimate alpha_complexity(const std::vector<Vec2>& samples, const VectorField& field,
                                    double alpha) {
    std::vector<double> q(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) q[i] = squared_norm(field(samples[i]));
    return alpha_complexity(q, alpha);
}

std::vector<Vec2> sample_grid_density(const GridDensity& density, std::size_t n, rng::Lineage lineage,
                                      std::uint64_t step) {
    const GridSpec& grid = density.grid;
    std::vector<double> cumulative(density.values.size());
    std::partial_sum(density.values.begin(), density.values.end(), cumulative.begin());
    if (cumulative.empty() || !(cumulative.back() > 0.0)) throw DomainError("grid density has no mass");

    std::vector<Vec2> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto stream = lineage.stream(i, step, rng::Tag::Diagnostic);
        const double u = stream.uniform() * cumulative.back();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t cell =
            std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
        const std::size_t ci = cell % grid.nx;
        const std::size_t cj = cell / grid.nx;
        out[i] = {grid.x_lo + (static_cast<double>(ci) + stream.uniform()) * grid.cell_width(),
                  grid.y_lo + (static_cast<double>(cj) + stream.uniform()) * grid.cell_height()};
    }
    return out;
}

std::vector<double> uniform_time_grid(double horizon, std::size_t nodes) {
    if (nodes < 2) throw ConfigError("time grid needs at least two nodes");
    std::vector<double> t(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        t[j] = horizon * static_cast<double>(j) / static_cast<double>(nodes - 1);
    }
    t.back() = horizon;
    return t;
}

double path_complexity(const VpMarginalFamily& family, const Guide* guide, double guidance_scale,
                       const TimeVectorField& field, double alpha, const std::vector<double>& t_grid,
                       const PathSampling& sampling) {
    if (t_grid.size() < 2) throw ConfigError("path_complexity needs at least two time nodes");
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        if (t_grid[j] < 0.0 || t_grid[j] > family.horizon()) {
            throw DomainError("time node outside [0, T]");
        }
        if (j > 0 && !(t_grid[j] > t_grid[j - 1])) throw DomainError("time nodes must increase");
    }
    std::vector<double> node_values(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const double t = t_grid[j];
        const GridDensity pi_t = guided_target_grid(family, t, guide, sampling.grid, guidance_scale);
        const auto xs = sample_grid_density(pi_t, sampling.samples_per_node, sampling.lineage, j);
        node_values[j] =
            alpha_complexity(xs, [&](Vec2 x) { return field(t, x); }, alpha).value;
    }
    double integral = 0.0;
    for (std::size_t j = 1; j < t_grid.size(); ++j) {
        integral += 0.5 * (t_grid[j] - t_grid[j - 1]) * (node_values[j] + node_values[j - 1]);
    }
    return integral;
}

VarianceEstimate sample_variance_with_error(const std::vector<double>& values) {
    if (values.size() < 2) throw DomainError("variance needs at least two samples");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : values) {
        const double d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    VarianceEstimate out;
    out.n_samples = values.size();
    out.value = m2 / (n - 1.0);
    m4 /= n;
    const double s4 = out.value * out.value;
    out.std_error = std::sqrt(std::max(0.0, (m4 - (n - 3.0) / (n - 1.0) * s4) / n));
    return out;
}

VarianceEstimate residual_variance(const VpMarginalFamily& family, const Guide& guide,
                                   double guidance_scale, const TimeVectorField& velocity, double t,
                                   std::size_t n_samples, rng::Lineage lineage, const GridSpec& grid) {
    const GridDensity pi_t = guided_target_grid(family, t, &guide, grid, guidance_scale);
    const auto xs = sample_grid_density(pi_t, n_samples, lineage);
    std::vector<double> g(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        g[i] = guidance_scale * dot(guide.grad(xs[i]), velocity(t, xs[i]));
    }
    return sample_variance_with_error(g);
}

}  // namespace sald
