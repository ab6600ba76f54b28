#include "oracles.hpp"
#include "selfsim/oracle_pde.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace selfsim;

TEST(OraclePde, ConstantDataStaysConstant) {
    const auto r = evolve(StressLaw::hardening(), {0.2, 0.3, 0.2, 0.3}, 0.02, 0.0, 3.0, 1.0, 0.5, 0.02);
    for (double w : r.w) EXPECT_NEAR(w, 0.3, 1e-13);
    for (double v : r.v) EXPECT_NEAR(v, 0.2, 1e-13);
    EXPECT_NEAR(r.t, 1.0, 1e-14);
}

TEST(OraclePde, ConservesMassUpToBoundaryFlux) {
    for (double delta : {0.0, 1e-4}) {
        const auto r = evolve(StressLaw::hardening(), {0.3, -0.5, -0.2, 0.4}, 0.02, delta, 6.0, 1.0, 0.4, 0.02);
        EXPECT_LT(r.mass_w_defect, 1e-6);
        EXPECT_LT(r.mass_v_defect, 1e-6);
    }
}

TEST(OraclePde, LinearWavesTravelAtTheSoundSpeed) {
    const double c = 2.0, T = 1.0;
    const auto r = evolve(StressLaw::linear(c), {0, 0, 0, 1}, 0.01, 0.0, 6.0, T, 0.4, 0.01);
    const oracle::LinearRiemann exact{c, 0, 0, 0, 1};
    // middle plateau
    EXPECT_NEAR(detail::interp(r.xc, r.w, 0.0), exact.w_star(), 1e-3);
    // half-amplitude crossings at x = -cT and x = cT
    auto crossing = [&](double lo, double hi, double level) -> double {
        for (std::size_t i = 0; i + 1 < r.xc.size(); ++i)
            if (r.xc[i] >= lo && r.xc[i + 1] <= hi && (r.w[i] - level) * (r.w[i + 1] - level) <= 0.0)
                return r.xc[i] + (level - r.w[i]) / (r.w[i + 1] - r.w[i]) * (r.xc[i + 1] - r.xc[i]);
        return NAN;
    };
    EXPECT_NEAR(crossing(-4.0, -0.5, 0.25), -c * T, 0.05);
    EXPECT_NEAR(crossing(0.5, 4.0, 0.75), c * T, 0.05);
}

TEST(OraclePde, MatchesTheSelfSimilarProfile) {
    const StressLaw law = StressLaw::linear(2.0);
    SolverConfig c;
    c.eps = 0.02;
    const auto sol = solve_profile(law, c, {0, 0, 0, 1});
    double prev = 1e9;
    for (double T : {0.5, 1.0}) {
        const auto ev = evolve(law, {0, 0, 0, 1}, 0.02, 0.0, 6.0 * T, T, 0.4, 0.01);
        const auto cmp = self_similar_compare(ev, sol);
        EXPECT_LT(cmp.l1_w, prev);
        prev = cmp.l1_w;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(OraclePde, BadStepOrDomainIsRejected) {
    const StressLaw law = StressLaw::linear(2.0);
    try {
        evolve(law, {0, 0, 0, 1}, 0.02, 0.0, 6.0, 1.0, 1.5, 0.02);
        FAIL();
    } catch (const SolverError& e) {
        EXPECT_EQ(e.code(), ErrorCode::cfl_violation);
    }
    // waves would reach the boundary
    EXPECT_THROW(evolve(law, {0, 0, 0, 1}, 0.02, 0.0, 2.0, 1.0, 0.4, 0.02), SolverError);
}
