#include "sald/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sald/errors.hpp"

namespace sald {

namespace {

// Endpoint slack for quantities produced by k * eta arithmetic.
constexpr double kEndpointSlack = 8 * std::numeric_limits<double>::epsilon();

double checked_tau(const BetaSchedule& schedule, double tau) {
    if (!(tau >= 0.0) || tau > schedule.horizon * (1.0 + kEndpointSlack)) {
        throw DomainError("tau=" + std::to_string(tau) + " outside [0, " +
                          std::to_string(schedule.horizon) + "]");
    }
    return std::min(tau, schedule.horizon);
}

}  // namespace

void BetaSchedule::validate() const {
    if (!(beta_min >= 0.0) || !(beta_max >= beta_min) || !std::isfinite(beta_max)) {
        throw ConfigError("beta schedule requires 0 <= beta_min <= beta_max");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ConfigError("beta schedule horizon must be positive");
    }
}

void TimeRescale::validate() const {
    if (!(budget >= 1.0) || !std::isfinite(budget)) throw ConfigError("budget r must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
}

double beta_at(const BetaSchedule& schedule, double tau) {
    tau = checked_tau(schedule, tau);
    return schedule.beta_min + (schedule.beta_max - schedule.beta_min) * tau / schedule.horizon;
}

double integrated_beta(const BetaSchedule& schedule, double tau) {
    tau = checked_tau(schedule, tau);
    return schedule.beta_min * tau +
           (schedule.beta_max - schedule.beta_min) * tau * tau / (2.0 * schedule.horizon);
}

VpCoefficients vp_coefficients(const BetaSchedule& schedule, double tau) {
    const double half_integral = 0.5 * integrated_beta(schedule, tau);
    // 1 - a^2 = -expm1(-2 * half_integral) keeps precision near tau = 0.
    return {std::exp(-half_integral), -std::expm1(-2.0 * half_integral)};
}

double slow_time(const TimeRescale& rescale, double s) {
    const double horizon_s = rescale.slowed_horizon();
    if (!(s >= 0.0) || s > horizon_s * (1.0 + kEndpointSlack)) {
        throw DomainError("s=" + std::to_string(s) + " outside [0, " + std::to_string(horizon_s) +
                          "]");
    }
    return std::min(s / rescale.budget, rescale.horizon);
}

std::uint64_t step_count(double budget, double horizon, double eta) {
    if (!(eta > 0.0)) throw ConfigError("step size eta must be positive");
    const double exact = budget * horizon / eta;
    const double rounded = std::round(exact);
    if (rounded < 1.0 || std::abs(exact - rounded) > 1e-6 * std::max(1.0, exact)) {
        throw ConfigError("r*T/eta = " + std::to_string(exact) + " is not a whole number of steps");
    }
    return static_cast<std::uint64_t>(rounded);
}

}  // namespace sald
