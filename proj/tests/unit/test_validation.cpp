#include <gtest/gtest.h>

#include <sstream>

#include "sald/errors.hpp"
#include "sald/validation.hpp"

using namespace sald;

namespace {

ValidationOptions quick() {
    ValidationOptions o;
    o.fd_points = 30;
    o.continuity_points = 30;
    o.zo_samples = 20000;
    o.alpha_samples = 100000;
    o.kl_samples = 300000;
    o.unguided_particles = 3000;
    o.unguided_budgets = {1.0};
    return o;
}

bool suite_passed(const std::vector<CheckResult>& results, const std::string& check) {
    for (const auto& r : results) {
        if (r.name == check) return r.passed;
    }
    ADD_FAILURE() << "missing check " << check;
    return false;
}

}  // namespace

TEST(Validation, ScoreSuitePasses) {
    const auto r = run_validation("score_fd", quick());
    EXPECT_EQ(r.size(), 5u);
    EXPECT_TRUE(all_passed(r));
}

TEST(Validation, SignFlippedScoreFailsFiniteDifferences) {
    auto o = quick();
    o.score = [](const VpMarginalFamily& f, double t, Vec2 x) { return -1.0 * marginal_score(f, t, x); };
    const auto r = run_validation("score_fd", o);
    EXPECT_FALSE(suite_passed(r, "eight_gaussian"));
    EXPECT_FALSE(suite_passed(r, "two_gaussian"));
    EXPECT_FALSE(all_passed(r));
    // The same corruption breaks the continuity equation.
    EXPECT_FALSE(suite_passed(run_validation("continuity", o), "vp_eight_gaussian"));
}

TEST(Validation, ReportIsDeterministic) {
    auto o = quick();
    auto render = [&] {
        std::ostringstream out;
        write_validation_report(out, run_validation("gaussian_kl", o));
        write_validation_report(out, run_validation("zo", o));
        return out.str();
    };
    const std::string a = render();
    EXPECT_EQ(a, render());
    EXPECT_EQ(a.rfind("suite,check,status,value,tolerance\n", 0), 0u);
}

TEST(Validation, QuickSuitesPass) {
    for (const std::string s : {"continuity", "gaussian_kl", "zo", "alpha", "unguided"}) {
        const auto r = run_validation(s, quick());
        EXPECT_FALSE(r.empty()) << s;
        for (const auto& c : r) EXPECT_TRUE(c.passed) << s << "/" << c.name << " value=" << c.value;
    }
}

TEST(Validation, UnknownSuiteIsConfigError) {
    EXPECT_THROW(run_validation("nope"), ConfigError);
    EXPECT_EQ(validation_suites().size(), 6u);
}

TEST(Validation, ResidualHelpers) {
    const VpMarginalFamily f{eight_gaussian(), BetaSchedule{}};
    EXPECT_LE(continuity_residual(f, marginal_score, 0.5, {1, 1}), 1e-3);
    const FlowMarginalFamily flow{eight_gaussian(), 1.0};
    EXPECT_LE(flow_continuity_residual(flow, 0.5, {1, 1}), 1e-3);
    EXPECT_LE(score_fd_error(f, marginal_score, {{0.5, {0.3, -0.7}}}), 1e-5);
}
