#include "selfsim/constitutive.hpp"
#include "selfsim/expression.hpp"
#include "selfsim/grid.hpp"
#include "selfsim/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace selfsim;

TEST(StressLaw, LinearLawValuesAndConstants) {
    const StressLaw law = StressLaw::linear(2.0);
    EXPECT_DOUBLE_EQ(law.sigma(0.5), 2.0);
    EXPECT_DOUBLE_EQ(law.deriv(-3.0), 4.0);
    EXPECT_DOUBLE_EQ(law.c0(), 2.0);
    EXPECT_TRUE(law.uniformly_hyperbolic());
    EXPECT_THROW(StressLaw::linear(0.0), SolverError);
}

TEST(StressLaw, HardeningDerivativeMatchesCentralDifference) {
    const StressLaw law = StressLaw::hardening();
    for (double w = -2.0; w <= 2.0; w += 0.25) {
        const double h = 1e-5;
        EXPECT_NEAR(law.deriv(w), (law.sigma(w + h) - law.sigma(w - h)) / (2 * h), 1e-8);
        EXPECT_GE(law.deriv(w), 1.0);
    }
}

TEST(StressLaw, CubicHyperbolicRegionSplitsAtInverseRootThree) {
    const auto r = hyperbolic_region(StressLaw::cubic(), {-2.0, 2.0});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0].hi, -1.0 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(r[1].lo, 1.0 / std::sqrt(3.0), 1e-12);
    EXPECT_DOUBLE_EQ(r[0].lo, -2.0);
    EXPECT_DOUBLE_EQ(r[1].hi, 2.0);
    EXPECT_FALSE(StressLaw::cubic().uniformly_hyperbolic());
    EXPECT_DOUBLE_EQ(StressLaw::cubic().c_lower(), 1.0);
}

TEST(StressLaw, UniformLawIsOneInterval) {
    const auto r = hyperbolic_region(StressLaw::hardening(), {-3.0, 3.0});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_DOUBLE_EQ(r[0].lo, -3.0);
    EXPECT_DOUBLE_EQ(r[0].hi, 3.0);
}

TEST(StressLaw, GrowthCheck) {
    EXPECT_TRUE(growth_check(StressLaw::hardening(), 10.0).satisfied);
    EXPECT_TRUE(growth_check(StressLaw::cubic(), 10.0).satisfied);
    // w^5 grows faster than w^2 allows
    const StressLaw fast = StressLaw::custom(
        "quintic", [](double w) { return w + std::pow(w, 5); }, [](double w) { return 1 + 5 * std::pow(w, 4); });
    const auto rep = growth_check(fast, 5.0, GrowthBound{3.0, 0.0});
    EXPECT_FALSE(rep.satisfied);
    EXPECT_NEAR(std::abs(rep.worst_w), 5.0, 1e-9);
}

TEST(StressLaw, TabulatedReproducesSampledLaw) {
    std::vector<double> w, s;
    for (int i = 0; i <= 200; ++i) {
        const double x = -2.0 + 4.0 * i / 200;
        w.push_back(x);
        s.push_back(x + x * x * x);
    }
    const StressLaw law = StressLaw::tabulated(w, s);
    for (double x = -1.9; x < 1.9; x += 0.137) {
        EXPECT_NEAR(law.sigma(x), x + x * x * x, 1e-4);
        EXPECT_NEAR(law.deriv(x), 1 + 3 * x * x, 5e-3);
    }
    EXPECT_GT(law.c0_sq(), 0.9);
    EXPECT_THROW(StressLaw::tabulated({0, 1, 1, 2}, {0, 1, 2, 3}), SolverError);
}

TEST(Grid, FullLineSharesTheOrigin) {
    const ProfileGrid g = make_grid(6.0, 11);
    ASSERT_EQ(g.size(), 11u);
    EXPECT_TRUE(g.shared_origin());
    EXPECT_DOUBLE_EQ(g.y[g.first_plus], 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(g.y[i], -g.y[g.size() - 1 - i]);
}

TEST(Grid, ExcisedGridMirrorsAndSkipsTheGap) {
    const ProfileGrid g = make_grid(6.0, 21, 0.5);
    EXPECT_FALSE(g.shared_origin());
    for (double y : g.y) EXPECT_GE(std::abs(y), 0.5 - 1e-15);
    const HalfAxis p = half_axis(g, Side::plus), m = half_axis(g, Side::minus);
    ASSERT_EQ(p.size(), m.size());
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_DOUBLE_EQ(p.x[k], m.x[k]);
    EXPECT_DOUBLE_EQ(p.x.front(), 0.5);
}

TEST(Quadrature, TrapezoidExactOnLinearAndCumulativeEndsAtTotal) {
    std::vector<double> x, f;
    for (int i = 0; i <= 50; ++i) {
        x.push_back(i * 0.1);
        f.push_back(3.0 * i * 0.1 + 1.0);
    }
    EXPECT_NEAR(quad::trapezoid(x, f), 1.5 * 25 + 5, 1e-12);
    const auto c = quad::cumulative(x, f);
    EXPECT_NEAR(c.back(), quad::trapezoid(x, f), 1e-12);
}

TEST(Quadrature, LogTrapezoidSurvivesHugeExponents) {
    std::vector<double> x, lf;
    for (int i = 0; i <= 1000; ++i) {
        x.push_back(i * 0.001);
        lf.push_back(2000.0 - 5.0 * i * 0.001);
    }
    // log int e^{2000 - 5x} on [0,1] = 2000 + log((1 - e^-5)/5)
    EXPECT_NEAR(quad::log_trapezoid_exp(x, lf), 2000.0 + std::log((1 - std::exp(-5.0)) / 5.0), 1e-5);
}

TEST(Expression, ParsesAndDifferentiates) {
    const auto v = variable_names("w", 2);
    const Expression e = Expression::parse("1.44*w1 + 0.5*w1*w2 - w2^3/2", v);
    const double x[2] = {0.3, -0.7};
    EXPECT_NEAR(e(x), 1.44 * 0.3 + 0.5 * 0.3 * -0.7 - std::pow(-0.7, 3) / 2, 1e-15);
    EXPECT_NEAR(e.derivative(0)(x), 1.44 + 0.5 * -0.7, 1e-15);
    EXPECT_NEAR(e.derivative(1)(x), 0.5 * 0.3 - 1.5 * 0.49, 1e-15);
}

TEST(Expression, ReportsColumnOnErrors) {
    const auto v = variable_names("u", 2);
    try {
        Expression::parse("u1 + * u2", v);
        FAIL();
    } catch (const SolverError& e) {
        EXPECT_EQ(e.code(), ErrorCode::config_error);
        EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
    }
    EXPECT_THROW(Expression::parse("u3", v), SolverError);
    EXPECT_THROW(Expression::parse("(u1", v), SolverError);
}

TEST(Expression, RandomPolynomialsAgreeWithFiniteDifferences) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const auto v = variable_names("w", 2);
    const Expression e = Expression::parse("(w1 - 2*w2)^2 * (1 + w1*w2) / (3 + w2^2)", v);
    for (int t = 0; t < 50; ++t) {
        double x[2] = {U(rng), U(rng)};
        for (std::size_t k = 0; k < 2; ++k) {
            double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
            xp[k] += 1e-6;
            xm[k] -= 1e-6;
            EXPECT_NEAR(e.derivative(k)(x), (e(xp) - e(xm)) / 2e-6, 1e-7);
        }
    }
}
