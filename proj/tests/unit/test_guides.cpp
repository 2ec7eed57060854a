#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sald/errors.hpp"
#include "sald/guides.hpp"

using namespace sald;

namespace {

struct LinearGuide final : Guide {
    Vec2 a;
    double b;
    LinearGuide(Vec2 a_, double b_) : a(a_), b(b_) {}
    double value(Vec2 x) const override { return dot(a, x) + b; }
    Vec2 grad(Vec2) const override { return a; }
};

Vec2 fd_grad(const Guide& g, Vec2 x, double h = 1e-6) {
    return {(g.value(x + Vec2{h, 0}) - g.value(x - Vec2{h, 0})) / (2 * h),
            (g.value(x + Vec2{0, h}) - g.value(x - Vec2{0, h})) / (2 * h)};
}

double relative(Vec2 a, Vec2 b) { return norm(a - b) / std::max(norm(b), 1e-2); }

}  // namespace

TEST(PointCloud, SinglePointExamples) {
    const PointCloudGuide g({{0, 0}}, 1.0);
    EXPECT_DOUBLE_EQ(g.value({3, 4}), 5.0);
    const Vec2 d = g.grad({3, 4});
    EXPECT_DOUBLE_EQ(d.x, 0.6);
    EXPECT_DOUBLE_EQ(d.y, 0.8);
    // Zero-distance term contributes nothing.
    EXPECT_EQ(g.grad({0, 0}), (Vec2{0, 0}));
}

TEST(PointCloud, AveragesAndScalesByLambda) {
    const PointCloudGuide g({{0, 0}, {2, 0}}, 2.0);
    EXPECT_DOUBLE_EQ(g.value({1, 0}), (1.0 + 1.0) / (2.0 * 2.0));
    EXPECT_NEAR(norm(g.grad({1, 0})), 0.0, 1e-15);
    EXPECT_THROW(PointCloudGuide({}, 1.0), ConfigError);
    EXPECT_THROW(PointCloudGuide({{0, 0}}, 0.0), ConfigError);
}

TEST(ModePenalty, Examples) {
    const ModePenaltyGuide g({{1, 1}}, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(g.value({1, 1}), 1.0);
    EXPECT_EQ(g.grad({1, 1}), (Vec2{0, 0}));
    EXPECT_NEAR(g.value({3, 1}), std::exp(-0.5), 1e-15);
    const ModePenaltyGuide scaled({{0, 0}}, 3.0, 1.0);
    EXPECT_NEAR(scaled.value({0, 1}), 3.0 * std::exp(-0.5), 1e-15);
}

TEST(Guides, GradientsMatchFiniteDifferences) {
    const PointCloudGuide cloud(two_moons_cloud({}), 1.0);
    const ModePenaltyGuide penalty(left_half_centers(eight_gaussian()), 1.0, 1.0);
    const QuadraticGuide quad({0.5, -1}, 2.0);
    rng::Stream s(3, 0, 0, rng::Tag::Test);
    for (const Guide* g : {static_cast<const Guide*>(&cloud), static_cast<const Guide*>(&penalty),
                           static_cast<const Guide*>(&quad)}) {
        for (int i = 0; i < 100; ++i) {
            const Vec2 x{-6 + 12 * s.uniform(), -6 + 12 * s.uniform()};
            ASSERT_LE(relative(g->grad(x), fd_grad(*g, x)), 1e-4);
        }
    }
}

TEST(LeftHalf, PicksFourRingModes) {
    const auto c = left_half_centers(eight_gaussian());
    ASSERT_EQ(c.size(), 4u);
    for (const Vec2& p : c) EXPECT_LT(p.x, 0.0);
}

TEST(TwoMoons, CloudShapeAndDeterminism) {
    const auto a = two_moons_cloud({});
    ASSERT_EQ(a.size(), 2000u);
    EXPECT_EQ(a, two_moons_cloud({}));
    const Vec2 m = sample_mean(a);
    EXPECT_LT(std::abs(m.x), 0.1);
    EXPECT_LT(std::abs(m.y), 0.1);
    double max_x = 0, max_y = 0;
    for (const Vec2& p : a) {
        max_x = std::max(max_x, std::abs(p.x));
        max_y = std::max(max_y, std::abs(p.y));
    }
    EXPECT_GT(max_x, 2.5);
    EXPECT_LT(max_x, 3.5);
    EXPECT_LT(max_y, 2.0);
    TwoMoonsParams other;
    other.seed = 1;
    EXPECT_NE(a, two_moons_cloud(other));
}

TEST(PointsCsv, RoundTripsWithHeader) {
    const auto pts = two_moons_cloud({50, 0.05, 2.0, 4});
    std::stringstream io;
    write_points_csv(io, pts);
    EXPECT_EQ(read_points_csv(io), pts);
    std::stringstream bad("x,y\n1,2\n3,oops\n");
    EXPECT_THROW(read_points_csv(bad), ConfigError);
}

TEST(Cache, ExactAtNodes) {
    const ModePenaltyGuide g(left_half_centers(eight_gaussian()), 1.0, 1.0);
    const BilinearGuideCache cache(g, {-8, 8, -8, 8, 33, 17});
    for (std::size_t j = 0; j < 17; j += 4) {
        for (std::size_t i = 0; i < 33; i += 5) {
            const Vec2 p = cache.node_position(i, j);
            EXPECT_EQ(cache.value(p), g.value(p));
            EXPECT_EQ(cache.grad(p), g.grad(p));
        }
    }
}

TEST(Cache, ReproducesLinearFunctions) {
    const LinearGuide g({0.7, -1.3}, 0.25);
    const BilinearGuideCache cache(g, {-8, 8, -8, 8, 9, 9});
    rng::Stream s(4, 0, 0, rng::Tag::Test);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 x{-8 + 16 * s.uniform(), -8 + 16 * s.uniform()};
        ASSERT_NEAR(cache.value(x), g.value(x), 1e-12);
        ASSERT_NEAR(norm(cache.grad(x) - g.a), 0.0, 1e-12);
    }
}

TEST(Cache, ClampsOutsideQueries) {
    const LinearGuide g({1, 1}, 0);
    const BilinearGuideCache cache(g, {-1, 1, -1, 1, 3, 3});
    EXPECT_NEAR(cache.value({5, 5}), 2.0, 1e-15);
    EXPECT_NEAR(cache.value({-5, 0}), -1.0, 1e-15);
    EXPECT_THROW(BilinearGuideCache(g, {-1, 1, -1, 1, 1, 3}), ConfigError);
}

TEST(Cache, TwoMoonsInterpolationWithinBound) {
    const PointCloudGuide g(two_moons_cloud({}), 1.0);
    const GridSpec nodes{-8, 8, -8, 8, 512, 512};
    const BilinearGuideCache cache(g, nodes);
    const double h = 16.0 / 511.0;
    const double diagonal = std::sqrt(2.0) * h;
    // |grad f| <= 1 / lambda for an average of distances.
    const double bound = 2.0 * diagonal * 1.0;
    rng::Stream s(6, 0, 0, rng::Tag::Test);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Vec2 x{-8 + 16 * s.uniform(), -8 + 16 * s.uniform()};
        worst = std::max(worst, std::abs(cache.value(x) - g.value(x)));
    }
    EXPECT_LE(worst, bound);
}

TEST(Cache, ErrorShrinksWithCellSize) {
    const ModePenaltyGuide g(left_half_centers(eight_gaussian()), 1.0, 1.0);
    auto max_error = [&](std::size_t n) {
        const BilinearGuideCache cache(g, {-8, 8, -8, 8, n, n});
        rng::Stream s(8, 0, 0, rng::Tag::Test);
        double worst = 0.0;
        for (int i = 0; i < 5000; ++i) {
            const Vec2 x{-8 + 16 * s.uniform(), -8 + 16 * s.uniform()};
            worst = std::max(worst, std::abs(cache.value(x) - g.value(x)));
        }
        return worst;
    };
    const double coarse = max_error(33);
    const double fine = max_error(65);
    EXPECT_LE(fine, 0.5 * coarse);
}

TEST(CacheCsv, OneRowPerNode) {
    const LinearGuide g({1, 0}, 0);
    const BilinearGuideCache cache(g, {-1, 1, -1, 1, 3, 2});
    std::stringstream out;
    write_cache_csv(out, cache);
    std::string line;
    std::getline(out, line);
    EXPECT_EQ(line, "x,y,f,grad_x,grad_y");
    int rows = 0;
    while (std::getline(out, line)) ++rows;
    EXPECT_EQ(rows, 6);
}

namespace {

double z_score(const ZoEstimate& e, Vec2 expected) {
    return std::max(std::abs(e.gradient.x - expected.x) / e.std_error.x,
                    std::abs(e.gradient.y - expected.y) / e.std_error.y);
}

}  // namespace

TEST(Zo, LinearRewardIsUnbiased) {
    ZoEstimatorConfig cfg{100000, 0.1, false};
    rng::Stream s(1, 0, 0, rng::Tag::Probe);
    const auto e = zo_gradient_with_error([](Vec2 x) { return x.x - 2 * x.y; }, {0.3, -0.2}, cfg, s);
    EXPECT_LE(z_score(e, {1, -2}), 3.0);
}

TEST(Zo, QuadraticRewardIsUnbiased) {
    ZoEstimatorConfig cfg{100000, 0.1, false};
    rng::Stream s(2, 0, 0, rng::Tag::Probe);
    const auto e = zo_gradient_with_error([](Vec2 x) { return 0.5 * squared_norm(x); }, {1, 2}, cfg, s);
    EXPECT_LE(z_score(e, {1, 2}), 3.0);
}

TEST(Zo, ConstantRewardNormalizesToZero) {
    ZoEstimatorConfig cfg{32, 0.3, true};
    rng::Stream s(3, 0, 0, rng::Tag::Probe);
    EXPECT_EQ(zo_gradient([](Vec2) { return 4.2; }, {1, 1}, cfg, s), (Vec2{0, 0}));
}

TEST(Zo, ConstantRewardRawEstimateIsCentered) {
    ZoEstimatorConfig cfg{100000, 0.5, false};
    rng::Stream s(4, 0, 0, rng::Tag::Probe);
    const auto e = zo_gradient_with_error([](Vec2) { return 1.0; }, {0, 0}, cfg, s);
    EXPECT_LE(z_score(e, {0, 0}), 3.0);
}

TEST(Zo, NormalizationIsAffineInvariant) {
    ZoEstimatorConfig cfg{32, 0.2, true};
    const auto f = [](Vec2 x) { return std::sin(x.x) + x.y * x.y; };
    rng::Stream a(5, 0, 0, rng::Tag::Probe);
    rng::Stream b(5, 0, 0, rng::Tag::Probe);
    const Vec2 g1 = zo_gradient(f, {0.4, 0.1}, cfg, a);
    const Vec2 g2 = zo_gradient([&](Vec2 x) { return 3.0 * f(x) + 10.0; }, {0.4, 0.1}, cfg, b);
    EXPECT_NEAR(g1.x, g2.x, 1e-9);
    EXPECT_NEAR(g1.y, g2.y, 1e-9);
}

TEST(Zo, DeterministicGivenStream) {
    ZoEstimatorConfig cfg{32, 0.2, true};
    const auto f = [](Vec2 x) { return x.x * x.y; };
    rng::Stream a(6, 1, 2, rng::Tag::Probe);
    rng::Stream b(6, 1, 2, rng::Tag::Probe);
    EXPECT_EQ(zo_gradient(f, {1, 2}, cfg, a), zo_gradient(f, {1, 2}, cfg, b));
}

TEST(Zo, ErrorsAndValidation) {
    rng::Stream s(7, 0, 0, rng::Tag::Probe);
    ZoEstimatorConfig cfg{8, 0.1, false};
    try {
        zo_gradient([](Vec2 x) { return x.x > 0.0 ? std::nan("") : 0.0; }, {5, 0}, cfg, s);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("probe 0"), std::string::npos);
    }
    EXPECT_THROW((ZoEstimatorConfig{1, 0.1, true}.validate()), ConfigError);
    EXPECT_THROW((ZoEstimatorConfig{4, 0.0, false}.validate()), ConfigError);
    EXPECT_NO_THROW((ZoEstimatorConfig{1, 0.1, false}.validate()));
}
