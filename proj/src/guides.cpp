#include "sald/guides.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "sald/errors.hpp"

namespace sald {

PointCloudGuide::PointCloudGuide(std::vector<Vec2> reference_points, double lambda)
    : points_(std::move(reference_points)), lambda_(lambda) {
    if (points_.empty()) throw ConfigError("point-cloud guide needs reference points");
    if (!(lambda_ > 0.0)) throw ConfigError("point-cloud guide lambda must be positive");
}

double PointCloudGuide::value(Vec2 x) const {
    double sum = 0.0;
    for (const Vec2& y : points_) sum += std::sqrt(squared_norm(x - y));
    return sum / (lambda_ * static_cast<double>(points_.size()));
}

Vec2 PointCloudGuide::grad(Vec2 x) const {
    Vec2 sum;
    for (const Vec2& y : points_) {
        const Vec2 d = x - y;
        const double r = std::sqrt(squared_norm(d));
        if (r > 0.0) sum += d / r;
    }
    return sum / (lambda_ * static_cast<double>(points_.size()));
}

ModePenaltyGuide::ModePenaltyGuide(std::vector<Vec2> penalized_centers, double lambda,
                                   double length_scale)
    : centers_(std::move(penalized_centers)), lambda_(lambda), length_scale_(length_scale) {
    if (!(lambda_ > 0.0)) throw ConfigError("mode penalty lambda must be positive");
    if (!(length_scale_ > 0.0)) throw ConfigError("mode penalty length scale must be positive");
}

double ModePenaltyGuide::value(Vec2 x) const {
    const double inv = 1.0 / (2.0 * length_scale_ * length_scale_);
    double sum = 0.0;
    for (const Vec2& c : centers_) sum += std::exp(-squared_norm(x - c) * inv);
    return lambda_ * sum;
}

Vec2 ModePenaltyGuide::grad(Vec2 x) const {
    const double l2 = length_scale_ * length_scale_;
    Vec2 sum;
    for (const Vec2& c : centers_) {
        const Vec2 d = x - c;
        sum += std::exp(-squared_norm(d) / (2.0 * l2)) * d;
    }
    return -(lambda_ / l2) * sum;
}

// ---------------------------------------------------------------------------

BilinearGuideCache::BilinearGuideCache(const Guide& guide, const GridSpec& nodes) : grid_(nodes) {
    grid_.validate();
    if (grid_.nx < 2 || grid_.ny < 2) throw ConfigError("guide cache needs at least 2x2 nodes");
    hx_ = (grid_.x_hi - grid_.x_lo) / static_cast<double>(grid_.nx - 1);
    hy_ = (grid_.y_hi - grid_.y_lo) / static_cast<double>(grid_.ny - 1);
    table_.resize(grid_.nx * grid_.ny);
    for (std::size_t j = 0; j < grid_.ny; ++j) {
        for (std::size_t i = 0; i < grid_.nx; ++i) {
            const Vec2 p = node_position(i, j);
            table_[j * grid_.nx + i] = {guide.value(p), guide.grad(p)};
        }
    }
}

Vec2 BilinearGuideCache::node_position(std::size_t i, std::size_t j) const {
    // Last node pinned to the upper bound so boundary queries hit it exactly.
    const double x = i + 1 == grid_.nx ? grid_.x_hi : grid_.x_lo + static_cast<double>(i) * hx_;
    const double y = j + 1 == grid_.ny ? grid_.y_hi : grid_.y_lo + static_cast<double>(j) * hy_;
    return {x, y};
}

BilinearGuideCache::Node BilinearGuideCache::interpolate(Vec2 x) const {
    const double px = (std::clamp(x.x, grid_.x_lo, grid_.x_hi) - grid_.x_lo) / hx_;
    const double py = (std::clamp(x.y, grid_.y_lo, grid_.y_hi) - grid_.y_lo) / hy_;
    const auto i = std::min(static_cast<std::size_t>(px), grid_.nx - 2);
    const auto j = std::min(static_cast<std::size_t>(py), grid_.ny - 2);
    const double fx = px - static_cast<double>(i);
    const double fy = py - static_cast<double>(j);
    const Node& a = table_[j * grid_.nx + i];
    const Node& b = table_[j * grid_.nx + i + 1];
    const Node& c = table_[(j + 1) * grid_.nx + i];
    const Node& d = table_[(j + 1) * grid_.nx + i + 1];
    const double wa = (1 - fx) * (1 - fy);
    const double wb = fx * (1 - fy);
    const double wc = (1 - fx) * fy;
    const double wd = fx * fy;
    return {wa * a.f + wb * b.f + wc * c.f + wd * d.f,
            wa * a.grad + wb * b.grad + wc * c.grad + wd * d.grad};
}

double BilinearGuideCache::value(Vec2 x) const { return interpolate(x).f; }

Vec2 BilinearGuideCache::grad(Vec2 x) const { return interpolate(x).grad; }

// ---------------------------------------------------------------------------

std::vector<Vec2> left_half_centers(const GaussianMixture& mixture) {
    std::vector<Vec2> out;
    for (const Vec2& c : mixture.means) {
        if (c.x < 0.0) out.push_back(c);
    }
    return out;
}

std::vector<Vec2> two_moons_cloud(const TwoMoonsParams& params) {
    if (params.n_points < 2) throw ConfigError("two-moons cloud needs at least 2 points");
    const std::size_t n_outer = params.n_points / 2;
    const std::size_t n_inner = params.n_points - n_outer;
    const rng::Lineage lineage{params.seed};
    const Vec2 center{0.5, 0.25};

    std::vector<Vec2> out;
    out.reserve(params.n_points);
    auto angle = [](std::size_t k, std::size_t n) {
        return n > 1 ? std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
    };
    for (std::size_t k = 0; k < n_outer; ++k) {
        const double a = angle(k, n_outer);
        out.push_back({std::cos(a), std::sin(a)});
    }
    for (std::size_t k = 0; k < n_inner; ++k) {
        const double a = angle(k, n_inner);
        out.push_back({1.0 - std::cos(a), 0.5 - std::sin(a)});
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        const Vec2 jitter = params.noise * lineage.stream(k, 0, rng::Tag::Cloud).normal2();
        out[k] = params.scale * (out[k] + jitter - center);
    }
    return out;
}

std::vector<Vec2> read_points_csv(std::istream& in) {
    std::vector<Vec2> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        Vec2 p;
        if (!(fields >> p.x >> p.y)) {
            if (out.empty() && line_no == 1) continue;  // header
            throw ConfigError("malformed point on line " + std::to_string(line_no));
        }
        out.push_back(p);
    }
    return out;
}

void write_points_csv(std::ostream& out, const std::vector<Vec2>& points) {
    const auto old = out.precision(17);
    out << "x,y\n";
    for (const Vec2& p : points) out << p.x << ',' << p.y << '\n';
    out.precision(old);
}

void write_cache_csv(std::ostream& out, const BilinearGuideCache& cache) {
    const auto old = out.precision(17);
    out << "x,y,f,grad_x,grad_y\n";
    for (std::size_t j = 0; j < cache.nodes().ny; ++j) {
        for (std::size_t i = 0; i < cache.nodes().nx; ++i) {
            const Vec2 p = cache.node_position(i, j);
            const auto& n = cache.node(i, j);
            out << p.x << ',' << p.y << ',' << n.f << ',' << n.grad.x << ',' << n.grad.y << '\n';
        }
    }
    out.precision(old);
}

// ---------------------------------------------------------------------------

void ZoEstimatorConfig::validate() const {
    if (batch_size < 1) throw ConfigError("zo batch size must be >= 1");
    if (normalize && batch_size < 2) throw ConfigError("zo normalization needs batch size >= 2");
    if (!(smoothing > 0.0)) throw ConfigError("zo smoothing must be positive");
}

ZoEstimate zo_gradient_with_error(const Reward& f, Vec2 x, const ZoEstimatorConfig& cfg,
                                  rng::Stream& stream) {
    cfg.validate();
    const std::size_t n = cfg.batch_size;
    std::vector<Vec2> eps(n);
    std::vector<double> reward(n);
    for (std::size_t i = 0; i < n; ++i) {
        eps[i] = stream.normal2();
        reward[i] = f(x + cfg.smoothing * eps[i]);
        if (!std::isfinite(reward[i])) {
            throw NumericalError("non-finite reward at probe " + std::to_string(i));
        }
    }
    if (cfg.normalize) {
        // Mean taken relative to the first probe so a constant batch centers to exact zeros.
        double shift = 0.0;
        for (double r : reward) shift += r - reward[0];
        const double mean = reward[0] + shift / static_cast<double>(n);
        double var = 0.0;
        for (double r : reward) var += (r - mean) * (r - mean);
        const double sd = std::max(std::sqrt(var / static_cast<double>(n)), kRewardStdFloor);
        for (double& r : reward) r = (r - mean) / sd;
    }
    Vec2 sum;
    Vec2 sum_sq;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 term = (reward[i] / cfg.smoothing) * eps[i];
        sum += term;
        sum_sq += Vec2{term.x * term.x, term.y * term.y};
    }
    const double dn = static_cast<double>(n);
    ZoEstimate out;
    out.gradient = sum / dn;
    if (n > 1) {
        const Vec2 m = out.gradient;
        const double vx = std::max(0.0, (sum_sq.x - dn * m.x * m.x) / (dn - 1.0));
        const double vy = std::max(0.0, (sum_sq.y - dn * m.y * m.y) / (dn - 1.0));
        out.std_error = {std::sqrt(vx / dn), std::sqrt(vy / dn)};
    }
    return out;
}

Vec2 zo_gradient(const Reward& f, Vec2 x, const ZoEstimatorConfig& cfg, rng::Stream& stream) {
    return zo_gradient_with_error(f, x, cfg, stream).gradient;
}

}  // namespace sald
