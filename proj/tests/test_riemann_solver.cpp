#include "oracles.hpp"
#include "selfsim/riemann_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace selfsim;

namespace {

SolverConfig config(double eps, double gamma = 0.0) {
    SolverConfig c;
    c.eps = eps;
    c.gamma = gamma;
    return c;
}

} // namespace

TEST(RiemannSolver, LinearMiddleStateAgainstExactSolution) {
    const StressLaw law = StressLaw::linear(2.0);
    const oracle::LinearRiemann exact{2.0, 0, 0, 0, 1};
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto s = solve_profile(law, config(eps), {0, 0, 0, 1});
        EXPECT_LE(std::abs(s.w_star - exact.w_star()), 5 * eps);
        EXPECT_LE(std::abs(s.v_star - exact.v_star()), 5 * eps);
        EXPECT_TRUE(s.converged);
    }
}

TEST(RiemannSolver, LinearVStarEqualsHalfTheGammaMoment) {
    // Delta v = 0, Delta w = 1, symmetric measures: v* = m+ / 2 exactly.
    const StressLaw law = StressLaw::linear(2.0);
    for (double eps : {0.1, 0.025, 0.01}) {
        const auto s = solve_profile(law, config(eps), {0, 0, 0, 1});
        EXPECT_NEAR(s.v_star, 0.5 * (oracle::LinearViscousMeasure{4.0, eps}).first_moment(), 1e-9);
    }
}

TEST(RiemannSolver, LinearProfileApproachesTheExactFan) {
    const StressLaw law = StressLaw::linear(2.0);
    const oracle::LinearRiemann exact{2.0, 0.3, -0.2, -0.1, 0.6};
    double prev = 1e9;
    for (double eps : {0.04, 0.01}) {
        const auto s = solve_profile(law, config(eps), {0.3, -0.2, -0.1, 0.6});
        double l1 = 0.0;
        for (std::size_t i = 1; i < s.grid.size(); ++i) {
            const double ym = 0.5 * (s.grid.y[i] + s.grid.y[i - 1]);
            l1 += (s.grid.y[i] - s.grid.y[i - 1]) * std::abs(0.5 * (s.grid.w[i] + s.grid.w[i - 1]) - exact.at(ym).second);
        }
        EXPECT_LT(l1, 2.0 * std::sqrt(eps));
        EXPECT_LT(l1, prev);
        prev = l1;
        // symmetric measures: w* = mean(w) + dv / (2 M)
        const double M = oracle::LinearViscousMeasure{4.0, eps}.first_moment();
        EXPECT_NEAR(s.w_star, 0.5 * (0.6 - 0.2) + (-0.1 - 0.3) / (2.0 * M), 1e-9);
    }
}

TEST(RiemannSolver, ConstantDataIsAFixedPoint) {
    for (const StressLaw& law : {StressLaw::linear(1.0), StressLaw::hardening()}) {
        const auto s = solve_profile(law, config(0.02), {0.4, 0.7, 0.4, 0.7});
        for (double w : s.grid.w) EXPECT_NEAR(w, 0.7, 1e-14);
        for (double v : s.grid.v) EXPECT_NEAR(v, 0.4, 1e-14);
        EXPECT_NEAR(s.tv_w, 0.0, 1e-13);
    }
}

TEST(RiemannSolver, RandomHardeningDataSatisfyBoundsAndClosure) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const StressLaw law = StressLaw::hardening();
    for (int t = 0; t < 8; ++t) {
        const RiemannData d{U(rng), U(rng), U(rng), U(rng)};
        for (double gamma : {0.0, 0.125}) {
            const auto s = solve_profile(law, config(0.02, gamma), d);
            const double base = std::abs(d.w_r - d.w_l) + 2.0 * std::abs(d.v_r - d.v_l);
            EXPECT_LE(s.tv_w, 1.05 * base + 1e-12);
            EXPECT_LE(s.tv_v, 1.05 * (s.lambda_M + 1.0) * base + 1e-12);
            EXPECT_LT(s.conservation_defect, 1e-9);
            EXPECT_TRUE(s.middle_bound_ok);
            EXPECT_NEAR(s.phi_minus.mass(), 1.0, 1e-12);
            EXPECT_NEAR(s.phi_plus.mass(), 1.0, 1e-12);
            EXPECT_EQ(s.grid.w.front(), d.w_l);
            EXPECT_EQ(s.grid.w.back(), d.w_r);
        }
    }
}

TEST(RiemannSolver, ReflectionSymmetry) {
    // (v, w)(y) solves data (vl, wl, vr, wr) iff (-v, w)(-y) solves (-vr, wr, -vl, wl).
    const StressLaw law = StressLaw::hardening();
    const auto a = solve_profile(law, config(0.03), {0.2, -0.4, -0.3, 0.5});
    const auto b = solve_profile(law, config(0.03), {0.3, 0.5, -0.2, -0.4});
    const std::size_t n = a.grid.size();
    for (std::size_t i = 0; i < n; i += 25) {
        EXPECT_NEAR(a.grid.w[i], b.grid.w[n - 1 - i], 1e-9);
        EXPECT_NEAR(a.grid.v[i], -b.grid.v[n - 1 - i], 1e-9);
    }
    EXPECT_NEAR(a.w_star, b.w_star, 1e-9);
}

TEST(RiemannSolver, DeterministicBitForBit) {
    const StressLaw law = StressLaw::hardening();
    const auto a = solve_profile(law, config(0.02, 0.125), {0.3, -0.5, -0.2, 0.4});
    const auto b = solve_profile(law, config(0.02, 0.125), {0.3, -0.5, -0.2, 0.4});
    EXPECT_EQ(a.grid.w, b.grid.w);
    EXPECT_EQ(a.grid.v, b.grid.v);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(RiemannSolver, InvalidConfigurationsAreRejected) {
    const StressLaw law = StressLaw::linear(1.0);
    EXPECT_THROW(solve_profile(law, config(0.02, 0.25), {0, 0, 0, 1}), SolverError);
    EXPECT_THROW(solve_profile(law, config(-0.1), {0, 0, 0, 1}), SolverError);
    EXPECT_THROW(solve_profile(law, config(0.02), {0, NAN, 0, 1}), SolverError);
}

TEST(RiemannSolver, NotConvergedCarriesThePartialIterate) {
    SolverConfig c = config(0.02);
    c.max_iter = 1;
    try {
        solve_profile(StressLaw::hardening(), c, {0.3, -0.5, -0.2, 0.4});
        FAIL();
    } catch (const NotConverged& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_converged);
        EXPECT_EQ(e.partial().iterations, 1);
        EXPECT_EQ(e.partial().grid.size(), c.n_nodes);
    }
}

TEST(Excision, CutoffMatchesDirectEvaluation) {
    for (double c : {0.5, 1.0, 2.0})
        for (double g : {1e-3, 0.01, 0.1, 0.2, 0.24})
            EXPECT_NEAR(delta_cutoff(c, g), oracle::excision_radius(c, g), 1e-12);
}

TEST(Excision, BelowCutoffIsRefused) {
    const StressLaw law = StressLaw::cubic();
    const double d0 = delta_cutoff(1.0, 0.05);
    try {
        solve_excised(law, config(0.02, 0.05), {0, -1.2, 0, 1.2}, 0.5 * d0);
        FAIL();
    } catch (const SolverError& e) {
        EXPECT_EQ(e.code(), ErrorCode::delta_below_cutoff);
    }
}

TEST(Excision, ViscousPhaseRunConverges) {
    const StressLaw law = StressLaw::cubic();
    const auto s = solve_excised(law, config(0.01), {0, -1.2, 0, 1.0}, 0.2);
    EXPECT_TRUE(s.converged);
    EXPECT_FALSE(s.grid.shared_origin());
    for (double y : s.grid.y) EXPECT_GE(std::abs(y), 0.2 - 1e-15);
    // the plus measure peaks at the excision edge, so closure is a discretization error
    SolverConfig fine = config(0.01);
    fine.n_nodes = 8001;
    const auto f = solve_excised(law, fine, {0, -1.2, 0, 1.0}, 0.2);
    EXPECT_LT(s.conservation_defect, 1e-3);
    EXPECT_LT(f.conservation_defect, 0.5 * s.conservation_defect);
}

TEST(Excision, OnePhaseRunClosesExactly) {
    const auto s = solve_excised(StressLaw::cubic(), config(0.01), {0, 1.2, 0.1, 1.0}, 0.05);
    EXPECT_TRUE(s.converged);
    EXPECT_LT(s.conservation_defect, 1e-12);
}
