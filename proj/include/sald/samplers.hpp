#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sald/guide.hpp"
#include "sald/guides.hpp"
#include "sald/particles.hpp"
#include "sald/targets.hpp"

namespace sald {

struct SamplerConfig {
    double eta = 0.001;
    double budget = 1.0;
    double guidance_scale = 1.0;
    unsigned threads = 1;
    // Observer cadence in steps; 0 selects max(1, K / 200).
    std::uint64_t observe_every = 0;
    // Test hook: drop the Brownian increment (xi = 0).
    bool zero_noise = false;

    void validate() const;
};

struct DoitConfig {
    std::size_t proposals = 4;
    double reward_temperature = 1.0;
    double strength = 1.0;
    // r_b: only sets the number of reverse transitions, never slows time.
    double budget_label = 1.0;

    void validate() const;
};

struct DoitSchedule {
    std::uint64_t steps = 0;
    double step_size = 0.0;
};

// N = ceil(r_b T / eta_s), eta_DOIT = T / N.
DoitSchedule doit_step_count(double budget_label, double horizon, double sald_eta);

struct StepInfo {
    std::uint64_t k = 0;
    // Algorithmic time k * eta (k * eta_s for DOIT).
    double s = 0.0;
    // Target time.
    double t = 0.0;
    bool terminal = false;
};

// Invoked at k = 0, every observe_every steps and after the last step.
using StepObserver = std::function<void(const StepInfo&, const std::vector<Vec2>&)>;

std::uint64_t observe_cadence(std::uint64_t steps, std::uint64_t requested);

// Discrete SALD on pi_t ∝ p_t exp(-c f): for k < K = rT/eta, t_k = k eta / r,
//   X <- X + eta (grad log p_{t_k}(X) - c grad f(X)) + sqrt(2 eta) xi.
// `guide` may be null.
ParticleEnsemble run_sald(const VpMarginalFamily& family, const Guide* guide,
                          const SamplerConfig& cfg, ParticleEnsemble init,
                          const StepObserver& observer = {});

// Velocity-aware SALD on VP marginals, sigma_t^2 = beta(T - t):
//   X <- X + eta [u_t(X) / r + sigma_t^2 / 2 (grad log p_t(X) - c grad f(X))] + sigma_t sqrt(eta) xi.
ParticleEnsemble run_va_sald_vp(const VpMarginalFamily& family, const Guide* guide,
                                const SamplerConfig& cfg, ParticleEnsemble init,
                                const StepObserver& observer = {});

// Velocity-aware SALD for a flow-matching family with black-box reward guidance.
// sigma_t = (1 - t) noise_scale, t = k eta / r, v_t := flow velocity at tau = 1 - t,
//   X <- (1 - sigma_t^2 eta / (2(1-t))) X - (1/r + t sigma_t^2 / (2(1-t))) eta v_t(X)
//        - c sigma_t^2 eta / 2 * g_hat(X) + sigma_t sqrt(eta) w,
// where g_hat is the zeroth-order estimate with smoothing sigma_t sqrt(eta).
// zo.smoothing is ignored (set per step). Reward may be empty when c == 0.
ParticleEnsemble run_va_sald_flow(const FlowMarginalFamily& family, const Reward& reward,
                                  const SamplerConfig& cfg, ZoEstimatorConfig zo, double noise_scale,
                                  ParticleEnsemble init, const StepObserver& observer = {});

// DOIT baseline: reverse VP Euler-Maruyama on the unslowed grid t_k = k eta_DOIT
// with a Doob correction estimated from M reward-weighted local proposals.
// Rewards are R = -c f. base.eta is the SALD step used for budget matching.
ParticleEnsemble run_doit(const VpMarginalFamily& family, const Guide* guide,
                          const DoitConfig& doit, const SamplerConfig& base, ParticleEnsemble init,
                          const StepObserver& observer = {});

// Softmax of (r_m - max r) / temperature.
std::vector<double> boltzmann_weights(const std::vector<double>& rewards, double temperature);

}  // namespace sald
