#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "sald/errors.hpp"
#include "sald/metrics.hpp"
#include "sald/samplers.hpp"

using namespace sald;

namespace {

VpMarginalFamily standard_family(double horizon = 1.0) {
    BetaSchedule s;
    s.horizon = horizon;
    return {single_gaussian({0, 0}), s};
}

SamplerConfig config(double eta, double r, unsigned threads = 1) {
    SamplerConfig c;
    c.eta = eta;
    c.budget = r;
    c.threads = threads;
    return c;
}

SamplerConfig unguided_flow() {
    SamplerConfig c = config(0.025, 4);
    c.guidance_scale = 0.0;
    return c;
}

Vec2 noise(std::uint64_t seed, std::size_t i, std::uint64_t k) {
    return rng::Stream(seed, i, k, rng::Tag::Noise).normal2();
}

}  // namespace

TEST(DoitSteps, Examples) {
    auto a = doit_step_count(100, 1, 0.001);
    EXPECT_EQ(a.steps, 100000u);
    auto b = doit_step_count(1, 1, 0.001);
    EXPECT_EQ(b.steps, 1000u);
    EXPECT_DOUBLE_EQ(b.step_size, 0.001);
    auto c = doit_step_count(3, 1, 0.0007);
    EXPECT_EQ(c.steps, 4286u);
    EXPECT_DOUBLE_EQ(c.step_size, 1.0 / 4286.0);
    EXPECT_THROW(doit_step_count(0.5, 1, 0.001), ConfigError);
}

TEST(DoitSteps, MatchSaldAtEveryBudget) {
    for (double r : {1.0, 2.0, 4.0, 10.0, 50.0, 100.0}) {
        EXPECT_EQ(doit_step_count(r, 1.0, 0.001).steps, step_count(r, 1.0, 0.001)) << r;
    }
}

TEST(Boltzmann, NormalizedAndShiftInvariant) {
    const std::vector<double> r{0.3, -1.2, 2.5, 0.0};
    const auto w = boltzmann_weights(r, 0.7);
    double total = 0.0;
    for (double v : w) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
    std::vector<double> shifted = r;
    for (double& v : shifted) v += 1234.5;
    const auto w2 = boltzmann_weights(shifted, 0.7);
    for (std::size_t m = 0; m < w.size(); ++m) EXPECT_NEAR(w[m], w2[m], 1e-12);
    const auto huge = boltzmann_weights({1e300, -1e300}, 1.0);
    EXPECT_EQ(huge[0], 1.0);
    EXPECT_EQ(huge[1], 0.0);
}

TEST(Sald, NoiselessStationaryDataContractsGeometrically) {
    const auto f = standard_family();
    SamplerConfig c = config(0.001, 1);
    c.zero_noise = true;
    ParticleEnsemble init{{{1.0, -2.0}, {0.5, 0.25}}, 0, {1}};
    const auto out = run_sald(f, nullptr, c, init);
    const double factor = std::pow(1 - 0.001, 1000);
    EXPECT_EQ(out.step_index, 1000u);
    EXPECT_NEAR(out.positions[0].x, factor, 1e-12);
    EXPECT_NEAR(out.positions[0].y, -2 * factor, 1e-12);
    EXPECT_NEAR(out.positions[1].x, 0.5 * factor, 1e-12);
}

TEST(Sald, SingleStepMatchesHandComputation) {
    const auto f = standard_family(0.01);
    const auto c = config(0.01, 1);
    const std::vector<Vec2> x0{{0.4, -1.1}, {2.0, 0.3}, {-0.7, 0.9}};
    const auto out = run_sald(f, nullptr, c, {x0, 0, {77}});
    ASSERT_EQ(out.step_index, 1u);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        const Vec2 expected = x0[i] + 0.01 * (-1.0 * x0[i]) + std::sqrt(0.02) * noise(77, i, 0);
        EXPECT_DOUBLE_EQ(out.positions[i].x, expected.x);
        EXPECT_DOUBLE_EQ(out.positions[i].y, expected.y);
    }
}

TEST(Sald, GuidanceEntersAsNegativeGradient) {
    const auto f = standard_family(0.01);
    SamplerConfig c = config(0.01, 1);
    c.zero_noise = true;
    c.guidance_scale = 2.0;
    const QuadraticGuide g({1, 0}, 1.0);
    const auto out = run_sald(f, &g, c, {{{0.0, 0.0}}, 0, {1}});
    // drift = -x - 2 (x - (1, 0)) at x = 0.
    EXPECT_NEAR(out.positions[0].x, 0.02, 1e-15);
    EXPECT_NEAR(out.positions[0].y, 0.0, 1e-15);
}

TEST(VaSald, SingleStepMatchesHandComputation) {
    const VpMarginalFamily f{single_gaussian({2, -1}), BetaSchedule{0.5, 3.0, 0.01}};
    const auto c = config(0.005, 2);
    const std::vector<Vec2> x0{{0.4, -1.1}, {2.0, 0.3}};
    const auto out = run_va_sald_vp(f, nullptr, c, {x0, 0, {5}});
    ASSERT_EQ(out.step_index, 4u);
    // Replay the update with independent formulas.
    std::vector<Vec2> x = x0;
    for (std::uint64_t k = 0; k < 4; ++k) {
        const double t = (k * 0.005) / 2.0;
        const double beta = 0.5 + (3.0 - 0.5) * (0.01 - t) / 0.01;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Vec2 s = marginal_score(f, t, x[i]);
            const Vec2 u = 0.5 * beta * (x[i] + s);
            x[i] = x[i] + 0.005 * (0.5 * u + 0.5 * beta * s) + std::sqrt(beta * 0.005) * noise(5, i, k);
        }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(out.positions[i].x, x[i].x, 1e-13);
        EXPECT_NEAR(out.positions[i].y, x[i].y, 1e-13);
    }
}

TEST(VaSald, UnguidedStandardNormalIsStationary) {
    const auto f = standard_family();
    const std::size_t n = 20000;
    const auto out = run_va_sald_vp(f, nullptr, config(0.001, 1), standard_normal_ensemble(n, {8}));
    const Vec2 m = sample_mean(out.positions);
    const Vec2 v = sample_variance(out.positions);
    EXPECT_LE(std::abs(m.x), 4 / std::sqrt(double(n)));
    EXPECT_LE(std::abs(m.y), 4 / std::sqrt(double(n)));
    EXPECT_NEAR(v.x, 1.0, 0.05);
    EXPECT_NEAR(v.y, 1.0, 0.05);
}

TEST(VaSald, UnguidedTracksShiftedGaussianAtSeveralBudgets) {
    const VpMarginalFamily f{single_gaussian({2, 0}), BetaSchedule{}};
    const std::size_t n = 10000;
    for (double r : {1.0, 4.0}) {
        const auto out = run_va_sald_vp(f, nullptr, config(0.001, r), standard_normal_ensemble(n, {9}));
        const Vec2 m = sample_mean(out.positions);
        const Vec2 v = sample_variance(out.positions);
        EXPECT_LE(std::abs(m.x - 2.0), 4 / std::sqrt(double(n))) << r;
        EXPECT_LE(std::abs(m.y), 4 / std::sqrt(double(n))) << r;
        EXPECT_NEAR(v.x, 1.0, 0.05) << r;
        EXPECT_NEAR(v.y, 1.0, 0.05) << r;
    }
}

TEST(Doit, StrengthZeroIsPlainReverseEulerMaruyama) {
    const VpMarginalFamily f{two_gaussian(), BetaSchedule{0.1, 20.0, 1.0}};
    const ModePenaltyGuide g({{-2.25, 0}}, 1.0, 1.0);
    DoitConfig d;
    d.strength = 0.0;
    d.budget_label = 1;
    SamplerConfig base = config(0.01, 1);
    const std::vector<Vec2> x0{{0.1, 0.2}, {-1.0, 0.5}};
    const auto out = run_doit(f, &g, d, base, {x0, 0, {13}});
    std::vector<Vec2> x = x0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const double t = k * 0.01;
        const double beta = 0.1 + 19.9 * (1.0 - t);
        for (auto i = 0u; i < x.size(); ++i) {
            const Vec2 b = 0.5 * beta * x[i] + beta * marginal_score(f, t, x[i]);
            x[i] = x[i] + 0.01 * b + std::sqrt(0.01 * beta) * noise(13, i, k);
        }
    }
    for (auto i = 0u; i < x.size(); ++i) {
        EXPECT_NEAR(out.positions[i].x, x[i].x, 1e-10);
        EXPECT_NEAR(out.positions[i].y, x[i].y, 1e-10);
    }
}

TEST(Doit, SingleProposalAlgebra) {
    const VpMarginalFamily f{two_gaussian(), BetaSchedule{0.1, 20.0, 0.01}};
    const ModePenaltyGuide g({{-2.25, 0}}, 1.0, 1.0);
    DoitConfig d;
    d.proposals = 1;
    d.strength = 0.7;
    d.budget_label = 1;
    const SamplerConfig base = config(0.01, 1);
    const std::vector<Vec2> x0{{0.3, -0.4}};
    const auto out = run_doit(f, &g, d, base, {x0, 0, {21}});
    ASSERT_EQ(out.step_index, 1u);
    const double beta = 20.0;
    const double sd = std::sqrt(0.01 * beta);
    const Vec2 z = rng::Stream(21, 0, 0, rng::Tag::Proposal).normal2();
    const Vec2 b = 0.5 * beta * x0[0] + beta * marginal_score(f, 0.0, x0[0]);
    const Vec2 expected = x0[0] + 0.01 * (b + 0.7 * beta * (z / sd)) + sd * noise(21, 0, 0);
    EXPECT_NEAR(out.positions[0].x, expected.x, 1e-13);
    EXPECT_NEAR(out.positions[0].y, expected.y, 1e-13);
}

TEST(Doit, RewardWeightsPullAwayFromPenalty) {
    const VpMarginalFamily f{two_gaussian(), BetaSchedule{}};
    const ModePenaltyGuide g({{-2.25, 0}}, 3.0, 1.0);
    DoitConfig d;
    const SamplerConfig base = config(0.001, 1);
    const auto guided = run_doit(f, &g, d, base, standard_normal_ensemble(4000, {2}));
    const auto plain = run_doit(f, nullptr, d, base, standard_normal_ensemble(4000, {2}));
    EXPECT_LT(mean_penalty(guided.positions, &g), mean_penalty(plain.positions, &g));
}

TEST(Flow, RunsExactlyK160Steps) {
    const FlowMarginalFamily f{single_gaussian({2, 0}), 1.0};
    std::uint64_t last = 0;
    int calls = 0;
    const auto out = run_va_sald_flow(f, {}, unguided_flow(), {}, 0.7, standard_normal_ensemble(10, {1}),
                                      [&](const StepInfo& info, const std::vector<Vec2>&) {
                                          last = info.k;
                                          ++calls;
                                      });
    EXPECT_EQ(out.step_index, 160u);
    EXPECT_EQ(last, 160u);
    EXPECT_GT(calls, 1);
}

TEST(Flow, UnguidedMomentsMatchData) {
    const FlowMarginalFamily f{single_gaussian({2, 0}), 1.0};
    const std::size_t n = 40000;
    const auto out = run_va_sald_flow(f, {}, unguided_flow(), {}, 0.7, standard_normal_ensemble(n, {4}));
    const Vec2 m = sample_mean(out.positions);
    const Vec2 v = sample_variance(out.positions);
    EXPECT_NEAR(m.x, 2.0, 0.05);
    EXPECT_NEAR(m.y, 0.0, 0.05);
    EXPECT_NEAR(v.x, 1.0, 0.05);
    EXPECT_NEAR(v.y, 1.0, 0.05);
}

TEST(Flow, GuidanceNeedsAReward) {
    const FlowMarginalFamily f{single_gaussian({2, 0}), 1.0};
    EXPECT_THROW(run_va_sald_flow(f, {}, config(0.025, 4), {}, 0.7, standard_normal_ensemble(4, {1})),
                 ConfigError);
}

TEST(Flow, RewardLowersPotential) {
    const FlowMarginalFamily f{single_gaussian({2, 0}), 1.0};
    SamplerConfig c = config(0.025, 4);
    c.guidance_scale = 1.0;
    const Reward potential = [](Vec2 x) { return 0.5 * squared_norm(x); };
    ZoEstimatorConfig zo;
    zo.normalize = false;
    const auto guided = run_va_sald_flow(f, potential, c, zo, 0.7, standard_normal_ensemble(4000, {3}));
    c.guidance_scale = 0.0;
    const auto plain = run_va_sald_flow(f, {}, c, zo, 0.7, standard_normal_ensemble(4000, {3}));
    EXPECT_LT(sample_mean(guided.positions).x, sample_mean(plain.positions).x - 0.05);
}

namespace {

using Runner = std::function<ParticleEnsemble(unsigned threads)>;

void expect_thread_independent(const Runner& run) {
    const auto one = run(1);
    const auto many = run(8);
    ASSERT_EQ(one.positions.size(), many.positions.size());
    EXPECT_EQ(one.positions, many.positions);
}

}  // namespace

TEST(Determinism, AllSamplersIgnoreThreadCount) {
    const VpMarginalFamily f{eight_gaussian(), BetaSchedule{}};
    const ModePenaltyGuide g(left_half_centers(f.data), 1.0, 1.0);
    const FlowMarginalFamily flow{two_gaussian(), 1.0};
    const Reward reward = [&](Vec2 x) { return g.value(x); };
    const auto init = standard_normal_ensemble(1001, {31});
    expect_thread_independent([&](unsigned t) { return run_sald(f, &g, config(0.001, 1, t), init); });
    expect_thread_independent([&](unsigned t) { return run_va_sald_vp(f, &g, config(0.001, 1, t), init); });
    expect_thread_independent([&](unsigned t) { return run_doit(f, &g, DoitConfig{}, config(0.001, 1, t), init); });
    expect_thread_independent([&](unsigned t) {
        SamplerConfig c = config(0.025, 4, t);
        return run_va_sald_flow(flow, reward, c, {}, 0.7, init);
    });
}

TEST(Determinism, SameSeedSameTrajectoryDifferentSeedDiffers) {
    const VpMarginalFamily f{eight_gaussian(), BetaSchedule{}};
    const auto a = run_sald(f, nullptr, config(0.001, 1), standard_normal_ensemble(100, {1}));
    const auto b = run_sald(f, nullptr, config(0.001, 1), standard_normal_ensemble(100, {1}));
    const auto c = run_sald(f, nullptr, config(0.001, 1), standard_normal_ensemble(100, {2}));
    EXPECT_EQ(a.positions, b.positions);
    EXPECT_NE(a.positions, c.positions);
}

TEST(Observer, CadenceAndClock) {
    const VpMarginalFamily f{eight_gaussian(), BetaSchedule{}};
    std::vector<StepInfo> seen;
    const auto obs = [&](const StepInfo& info, const std::vector<Vec2>&) { seen.push_back(info); };
    run_va_sald_vp(f, nullptr, config(0.001, 4), standard_normal_ensemble(10, {1}), obs);
    // K = 4000, cadence 20: k = 0, 20, ..., 4000.
    ASSERT_EQ(seen.size(), 201u);
    for (std::size_t j = 0; j < seen.size(); ++j) {
        EXPECT_EQ(seen[j].k, 20 * j);
        EXPECT_EQ(seen[j].s, static_cast<double>(seen[j].k) * 0.001);
        EXPECT_EQ(seen[j].t, seen[j].s / 4.0);
        EXPECT_EQ(seen[j].terminal, j + 1 == seen.size());
    }
    EXPECT_EQ(observe_cadence(100, 0), 1u);
    EXPECT_EQ(observe_cadence(100000, 0), 500u);
    EXPECT_EQ(observe_cadence(100000, 7), 7u);
}

TEST(Observer, DoitClockUsesSaldGrid) {
    const VpMarginalFamily f{eight_gaussian(), BetaSchedule{}};
    DoitConfig d;
    d.budget_label = 3;
    std::vector<StepInfo> seen;
    run_doit(f, nullptr, d, config(0.001, 1), standard_normal_ensemble(4, {1}),
             [&](const StepInfo& info, const std::vector<Vec2>&) { seen.push_back(info); });
    ASSERT_FALSE(seen.empty());
    EXPECT_EQ(seen.back().k, 3000u);
    EXPECT_EQ(seen.back().t, 1.0);
    for (const auto& info : seen) {
        EXPECT_EQ(info.s, static_cast<double>(info.k) * 0.001);
        EXPECT_NEAR(info.t, info.s / 3.0, 4e-16);
    }
}

TEST(Abort, NonFiniteParticleNamesStepAndIndex) {
    const VpMarginalFamily f{eight_gaussian(), BetaSchedule{}};
    struct Explode final : Guide {
        double value(Vec2) const override { return 0.0; }
        Vec2 grad(Vec2 x) const override { return x.x > 1e5 ? Vec2{std::nan(""), 0} : Vec2{-1e9, 0}; }
    } bad;
    try {
        run_sald(f, &bad, config(0.001, 1), standard_normal_ensemble(5, {1}));
        FAIL() << "expected SamplerAbort";
    } catch (const SamplerAbort& e) {
        EXPECT_EQ(e.step(), 1u);
        EXPECT_EQ(e.particle(), 0u);
    }
    ParticleEnsemble init = standard_normal_ensemble(3, {1});
    init.positions[2].y = INFINITY;
    EXPECT_THROW(run_sald(f, nullptr, config(0.001, 1), init), SamplerAbort);
}

TEST(Config, Validation) {
    const auto f = standard_family();
    const auto init = standard_normal_ensemble(2, {1});
    EXPECT_THROW(run_sald(f, nullptr, config(0.0, 1), init), ConfigError);
    EXPECT_THROW(run_sald(f, nullptr, config(0.001, 0.5), init), ConfigError);
    EXPECT_THROW(run_sald(f, nullptr, config(0.0003, 1), init), ConfigError);
    DoitConfig d;
    d.reward_temperature = 0;
    EXPECT_THROW(run_doit(f, nullptr, d, config(0.001, 1), init), ConfigError);
}

TEST(Sald, LongerBudgetImprovesStaticTarget) {
    // beta = 0 freezes the marginals, so every t sees the data law itself.
    const VpMarginalFamily f{single_gaussian({3, 0}), BetaSchedule{0.0, 0.0, 1.0}};
    const auto target = guided_target_grid(f, 1.0, nullptr, GridSpec{}, 0.0);
    double prev = INFINITY;
    for (double r : {1.0, 2.0, 4.0}) {
        const auto out = run_sald(f, nullptr, config(0.01, r), standard_normal_ensemble(20000, {6}));
        const double kl = kl_grid(out.positions, target).value;
        EXPECT_LE(kl, prev + 0.02) << r;
        prev = kl;
    }
}
