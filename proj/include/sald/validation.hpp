#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sald/targets.hpp"

namespace sald {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    // The measured quantity and the bound it is compared against.
    double value = 0.0;
    double tolerance = 0.0;
};

using ScoreFunction = std::function<Vec2(const VpMarginalFamily&, double, Vec2)>;

struct ValidationOptions {
    std::uint64_t seed = 20240611;
    // Score under test; empty means marginal_score. Fixtures inject broken
    // scores here to check that the suites can fail.
    ScoreFunction score;
    std::size_t fd_points = 100;
    std::size_t continuity_points = 100;
    std::size_t zo_samples = 100000;
    std::size_t alpha_samples = 1000000;
    std::size_t kl_samples = 1000000;
    std::size_t unguided_particles = 10000;
    std::vector<double> unguided_budgets{1.0, 4.0, 10.0};
    unsigned threads = 1;
};

// score_fd, continuity, gaussian_kl, zo, alpha, unguided.
const std::vector<std::string>& validation_suites();

// `suite` is one name from validation_suites() or "all".
std::vector<CheckResult> run_validation(const std::string& suite, const ValidationOptions& options = {});

// suite,check,status,value,tolerance
void write_validation_report(std::ostream& out, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

// Largest relative error |fd - score| / max(|score|, 1e-2) of the score
// against central differences (step h) of marginal_log_density.
double score_fd_error(const VpMarginalFamily& family, const ScoreFunction& score,
                      const std::vector<std::pair<double, Vec2>>& points, double h = 1e-5);

// |d/dt p_t + div(p_t u_t)| / p_t at (t, x) by central differences.
double continuity_residual(const VpMarginalFamily& family, const ScoreFunction& score, double t, Vec2 x,
                           double h_t = 1e-4, double h_x = 1e-4);
// Same for the flow family: d/dtau p + div(p v) with v = flow_velocity.
double flow_continuity_residual(const FlowMarginalFamily& family, double tau, Vec2 x, double h_t = 1e-4,
                                double h_x = 1e-4);

}  // namespace sald
