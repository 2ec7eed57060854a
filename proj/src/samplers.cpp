#include "sald/samplers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "sald/errors.hpp"
#include "sald/parallel.hpp"
#include "sald/schedules.hpp"

namespace sald {

void SamplerConfig::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
    if (!(budget >= 1.0) || !std::isfinite(budget)) throw ConfigError("budget r must be >= 1");
    if (!(guidance_scale >= 0.0)) throw ConfigError("guidance scale must be >= 0");
}

void DoitConfig::validate() const {
    if (proposals < 1) throw ConfigError("doit needs at least one proposal");
    if (!(reward_temperature > 0.0)) throw ConfigError("doit reward temperature must be positive");
    if (!(strength >= 0.0)) throw ConfigError("doit guidance strength must be >= 0");
    if (!(budget_label >= 1.0)) throw ConfigError("doit budget label must be >= 1");
}

DoitSchedule doit_step_count(double budget_label, double horizon, double sald_eta) {
    if (!(budget_label >= 1.0)) throw ConfigError("doit budget label must be >= 1");
    if (!(sald_eta > 0.0) || !(horizon > 0.0)) throw ConfigError("doit needs positive eta and T");
    const double exact = budget_label * horizon / sald_eta;
    // r_b T / eta_s is an integer in exact arithmetic for the usual budgets; do not
    // let a one-ulp overshoot of the quotient add a step.
    const double steps = std::ceil(exact * (1.0 - 1e-12));
    return {static_cast<std::uint64_t>(steps), horizon / steps};
}

std::uint64_t observe_cadence(std::uint64_t steps, std::uint64_t requested) {
    if (requested > 0) return requested;
    return std::max<std::uint64_t>(1, steps / 200);
}

std::vector<double> boltzmann_weights(const std::vector<double>& rewards, double temperature) {
    std::vector<double> w(rewards.size());
    if (rewards.empty()) return w;
    const double top = *std::max_element(rewards.begin(), rewards.end());
    double total = 0.0;
    for (std::size_t m = 0; m < rewards.size(); ++m) {
        w[m] = std::exp((rewards[m] - top) / temperature);
        total += w[m];
    }
    for (double& v : w) v /= total;
    return w;
}

namespace {

constexpr std::size_t kNoBadParticle = std::numeric_limits<std::size_t>::max();

void record_bad(std::atomic<std::size_t>& slot, std::size_t i) {
    std::size_t cur = slot.load(std::memory_order_relaxed);
    while (i < cur && !slot.compare_exchange_weak(cur, i, std::memory_order_relaxed)) {
    }
}

// Shared step loop. time_of(k) gives (s, t) of grid point k; make_kernel(info)
// returns the per-particle map (i, x) -> x' for the transition out of info.k.
template <class TimeOf, class MakeKernel>
ParticleEnsemble drive(std::uint64_t steps, const SamplerConfig& cfg, ParticleEnsemble ens,
                       const StepObserver& observer, TimeOf&& time_of, MakeKernel&& make_kernel) {
    for (std::size_t i = 0; i < ens.positions.size(); ++i) {
        if (!is_finite(ens.positions[i])) throw SamplerAbort(0, i);
    }
    if (steps > 0xFFFFFFFFull) throw ConfigError("step count exceeds the rng counter range");
    if (ens.positions.size() > 0xFFFFFFFFull) throw ConfigError("too many particles for the rng counter");
    const std::uint64_t cadence = observe_cadence(steps, cfg.observe_every);
    WorkerPool pool(cfg.threads);
    auto& pos = ens.positions;
    ens.step_index = 0;

    if (observer) {
        StepInfo info = time_of(0);
        info.terminal = steps == 0;
        observer(info, pos);
    }
    for (std::uint64_t k = 0; k < steps; ++k) {
        const StepInfo info = time_of(k);
        auto kernel = make_kernel(info);
        std::atomic<std::size_t> bad{kNoBadParticle};
        pool.run(pos.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const Vec2 next = kernel(i, pos[i]);
                if (!is_finite(next)) record_bad(bad, i);
                pos[i] = next;
            }
        });
        if (bad.load() != kNoBadParticle) throw SamplerAbort(k, bad.load());
        ens.step_index = k + 1;
        if (observer && ((k + 1) % cadence == 0 || k + 1 == steps)) {
            StepInfo after = time_of(k + 1);
            after.terminal = k + 1 == steps;
            observer(after, pos);
        }
    }
    return ens;
}

// Streams for particle i at step k; drive() has already bounded both to 32 bits.
rng::Stream stream_at(const rng::Key& key, std::size_t i, std::uint64_t k, rng::Tag tag) {
    return rng::Stream(key, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k), tag);
}

Vec2 brownian(const rng::Key& key, std::size_t i, std::uint64_t k, bool zero_noise) {
    if (zero_noise) return {};
    return stream_at(key, i, k, rng::Tag::Noise).normal2();
}

auto slowed_clock(double eta, const TimeRescale& rescale) {
    return [eta, rescale](std::uint64_t k) {
        StepInfo info;
        info.k = k;
        info.s = static_cast<double>(k) * eta;
        info.t = slow_time(rescale, info.s);
        return info;
    };
}

}  // namespace

ParticleEnsemble run_sald(const VpMarginalFamily& family, const Guide* guide,
                          const SamplerConfig& cfg, ParticleEnsemble init,
                          const StepObserver& observer) {
    cfg.validate();
    const TimeRescale rescale{cfg.budget, family.horizon()};
    const std::uint64_t steps = step_count(cfg.budget, family.horizon(), cfg.eta);
    const double eta = cfg.eta;
    const double noise_sd = std::sqrt(2.0 * eta);
    const double c = guide != nullptr ? cfg.guidance_scale : 0.0;
    const rng::Key key = init.lineage.key();

    return drive(steps, cfg, std::move(init), observer, slowed_clock(eta, rescale),
                 [&](const StepInfo& info) {
                     return [&, k = info.k, snap = family.at(info.t)](std::size_t i, Vec2 x) {
                         Vec2 drift = snap.score(x);
                         if (c != 0.0) drift -= c * guide->grad(x);
                         return x + eta * drift + noise_sd * brownian(key, i, k, cfg.zero_noise);
                     };
                 });
}

ParticleEnsemble run_va_sald_vp(const VpMarginalFamily& family, const Guide* guide,
                                const SamplerConfig& cfg, ParticleEnsemble init,
                                const StepObserver& observer) {
    cfg.validate();
    const TimeRescale rescale{cfg.budget, family.horizon()};
    const std::uint64_t steps = step_count(cfg.budget, family.horizon(), cfg.eta);
    const double eta = cfg.eta;
    const double rate = rescale.rate();
    const double c = guide != nullptr ? cfg.guidance_scale : 0.0;
    const rng::Key key = init.lineage.key();

    return drive(steps, cfg, std::move(init), observer, slowed_clock(eta, rescale),
                 [&](const StepInfo& info) {
                     const double beta = family.reverse_beta(info.t);
                     const double noise_sd = std::sqrt(beta * eta);
                     return [&, k = info.k, beta, noise_sd,
                             snap = family.at(info.t)](std::size_t i, Vec2 x) {
                         const Vec2 score = snap.score(x);
                         const Vec2 transport = 0.5 * beta * (x + score);
                         Vec2 guided_score = score;
                         if (c != 0.0) guided_score -= c * guide->grad(x);
                         const Vec2 drift = rate * transport + 0.5 * beta * guided_score;
                         return x + eta * drift + noise_sd * brownian(key, i, k, cfg.zero_noise);
                     };
                 });
}

ParticleEnsemble run_va_sald_flow(const FlowMarginalFamily& family, const Reward& reward,
                                  const SamplerConfig& cfg, ZoEstimatorConfig zo, double noise_scale,
                                  ParticleEnsemble init, const StepObserver& observer) {
    cfg.validate();
    family.validate();
    if (!(noise_scale >= 0.0)) throw ConfigError("flow noise scale must be >= 0");
    const double c = cfg.guidance_scale;
    if (c != 0.0 && !reward) throw ConfigError("flow sampler needs a reward when c > 0");
    const TimeRescale rescale{cfg.budget, 1.0};
    const std::uint64_t steps = step_count(cfg.budget, 1.0, cfg.eta);
    const double eta = cfg.eta;
    const double rate = rescale.rate();
    const rng::Key key = init.lineage.key();

    return drive(steps, cfg, std::move(init), observer, slowed_clock(eta, rescale),
                 [&](const StepInfo& info) {
                     const double t = info.t;
                     const double tau = 1.0 - t;
                     const double sigma = (1.0 - t) * noise_scale;
                     const double sigma_sq = sigma * sigma;
                     const double contraction = sigma_sq * eta / (2.0 * (1.0 - t));
                     const double transport = (rate + t * sigma_sq / (2.0 * (1.0 - t))) * eta;
                     const double guide_coeff = c * sigma_sq * eta / 2.0;
                     const double noise_sd = sigma * std::sqrt(eta);
                     ZoEstimatorConfig probe = zo;
                     probe.smoothing = noise_sd;
                     return [&, k = info.k, tau, contraction, transport, guide_coeff, noise_sd, probe,
                             snap = family.at(tau)](std::size_t i, Vec2 x) {
                         const Vec2 v = flow_velocity_posterior(family, snap, tau, x);
                         Vec2 next = (1.0 - contraction) * x - transport * v;
                         if (guide_coeff != 0.0) {
                             auto stream = stream_at(key, i, k, rng::Tag::Probe);
                             next -= guide_coeff * zo_gradient(reward, x, probe, stream);
                         }
                         return next + noise_sd * brownian(key, i, k, cfg.zero_noise);
                     };
                 });
}

ParticleEnsemble run_doit(const VpMarginalFamily& family, const Guide* guide,
                          const DoitConfig& doit, const SamplerConfig& base, ParticleEnsemble init,
                          const StepObserver& observer) {
    base.validate();
    doit.validate();
    const DoitSchedule schedule = doit_step_count(doit.budget_label, family.horizon(), base.eta);
    const double eta = schedule.step_size;
    const double horizon = family.horizon();
    const double c = guide != nullptr ? base.guidance_scale : 0.0;
    const std::size_t m_count = doit.proposals;
    const rng::Key key = init.lineage.key();

    // s is reported on the SALD grid (k eta_s) so rows line up across methods;
    // the target time advances by eta_DOIT per step.
    const double sald_eta = base.eta;
    auto clock = [eta, sald_eta, horizon](std::uint64_t k) {
        StepInfo info;
        info.k = k;
        info.s = static_cast<double>(k) * sald_eta;
        info.t = std::min(static_cast<double>(k) * eta, horizon);
        return info;
    };

    return drive(
        schedule.steps, base, std::move(init), observer, clock, [&](const StepInfo& info) {
            const double beta = family.reverse_beta(info.t);
            const double sd = std::sqrt(eta * beta);
            return [&, k = info.k, beta, sd, snap = family.at(info.t)](std::size_t i, Vec2 x) {
                thread_local std::vector<Vec2> z;
                thread_local std::vector<double> weights;
                z.resize(m_count);
                weights.resize(m_count);

                const Vec2 drift = 0.5 * beta * x + beta * snap.score(x);
                const Vec2 mean = x + eta * drift;
                auto proposals = stream_at(key, i, k, rng::Tag::Proposal);
                double top = -std::numeric_limits<double>::infinity();
                for (std::size_t m = 0; m < m_count; ++m) {
                    z[m] = proposals.normal2();
                    weights[m] = c != 0.0 ? -c * guide->value(mean + sd * z[m]) : 0.0;
                    top = std::max(top, weights[m]);
                }
                double total = 0.0;
                for (double& w : weights) {
                    w = std::exp((w - top) / doit.reward_temperature);
                    total += w;
                }
                Vec2 doob;
                if (sd > 0.0) {
                    for (std::size_t m = 0; m < m_count; ++m) doob += (weights[m] / total) * z[m];
                    doob = doob / sd;
                }
                return x + eta * (drift + doit.strength * beta * doob) +
                       sd * brownian(key, i, k, base.zero_noise);
            };
        });
}

}  // namespace sald
