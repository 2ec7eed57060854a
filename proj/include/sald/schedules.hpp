#pragma once

#include <cstdint>

namespace sald {

// Linear noise-rate schedule beta(tau) on [0, T].
struct BetaSchedule {
    double beta_min = 0.1;
    double beta_max = 20.0;
    double horizon = 1.0;

    void validate() const;
};

// Variance-preserving forward coefficients: Y_tau = decay * X_0 + sqrt(noise_var) * Z.
struct VpCoefficients {
    double decay = 1.0;
    double noise_var = 0.0;
};

// Linear slowdown t(s) = s / r on s in [0, r T].
struct TimeRescale {
    double budget = 1.0;
    double horizon = 1.0;

    void validate() const;
    double slowed_horizon() const { return budget * horizon; }
    // dt/ds; exactly 1/r.
    double rate() const { return 1.0 / budget; }
};

double beta_at(const BetaSchedule& schedule, double tau);

// Closed form of \int_0^tau beta(s) ds.
double integrated_beta(const BetaSchedule& schedule, double tau);

VpCoefficients vp_coefficients(const BetaSchedule& schedule, double tau);

double slow_time(const TimeRescale& rescale, double s);

// K = round(r T / eta). Throws ConfigError when the product is not (close to)
// an integer number of steps or eta <= 0.
std::uint64_t step_count(double budget, double horizon, double eta);

}  // namespace sald
