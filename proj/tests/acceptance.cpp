// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include "oracles.hpp"
#include "selfsim/selfsim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace selfsim;

namespace {

struct Verdict {
    bool ok = true;
    std::ostringstream note;
    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            note << " [" << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

SolverConfig config(double eps, double gamma = 0.0) {
    SolverConfig c;
    c.eps = eps;
    c.gamma = gamma;
    return c;
}

void linear_middle_state(Verdict& v) {
    const oracle::LinearRiemann exact{2.0, 0, 0, 0, 1};
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto t0 = Clock::now();
        const auto s = solve_profile(StressLaw::linear(2.0), config(eps), {0, 0, 0, 1});
        const double dt = seconds_since(t0);
        v.note << " eps=" << eps << ": |w*-0.5|=" << std::abs(s.w_star - exact.w_star()) << " (" << dt << "s)";
        v.expect(std::abs(s.w_star - exact.w_star()) <= 5 * eps, "middle state");
        v.expect(dt < 5.0, "runtime");
    }
}

void tv_bounds(Verdict& v) {
    const StressLaw law = StressLaw::hardening();
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst_w = 0.0, worst_v = 0.0;
    for (int k = 0; k < 20; ++k) {
        const RiemannData d{U(rng), U(rng), U(rng), U(rng)};
        for (double gamma : {0.0, 0.125}) {
            const auto s = solve_profile(law, config(0.02, gamma), d);
            const double base = std::abs(d.w_r - d.w_l) + 2.0 / law.c0() * std::abs(d.v_r - d.v_l);
            worst_w = std::max(worst_w, s.tv_w / base);
            worst_v = std::max(worst_v, s.tv_v / ((s.lambda_M + 1.0) * base));
        }
    }
    v.note << " max tv_w/bound=" << worst_w << " max tv_v/bound=" << worst_v;
    v.expect(worst_w <= 1.05, "tv_w");
    v.expect(worst_v <= 1.05, "tv_v");
}

void measure_invariants(Verdict& v) {
    for (const StressLaw& law : {StressLaw::linear(2.0), StressLaw::hardening()}) {
        const auto s = solve_profile(law, config(0.02), {0.3, -0.5, -0.2, 0.4});
        for (const WaveMeasure* m : {&s.phi_minus, &s.phi_plus}) {
            v.expect(std::abs(m->mass() - 1.0) <= 1e-12, "normalization");
            for (double x : m->density) v.expect(x >= 0.0, "positivity");
            const auto env = envelope_check(*m);
            v.note << " C1=" << env.fitted_c1;
            v.expect(env.applicable && env.pass && env.fitted_c1 <= 100.0, "envelope");
        }
    }
}

void rankine_hugoniot(Verdict& v) {
    const double eps = 0.01;
    std::vector<std::pair<StressLaw, RiemannData>> runs = {{StressLaw::linear(2.0), {0, 0, 0, 1}},
                                                          {StressLaw::linear(2.0), {0.3, -0.2, -0.1, 0.6}}};
    for (const RiemannData& d : {RiemannData{0.3, -0.5, -0.2, 0.4}, RiemannData{-0.4, 0.1, 0.6, 0.3},
                                 RiemannData{0.5, 0.2, -0.5, 0.2}, RiemannData{0.0, 0.5, 0.0, -0.5}})
        runs.emplace_back(StressLaw::hardening(), d);
    std::size_t count = 0;
    double worst = 0.0, sum_err = 0.0;
    for (const auto& [law, d] : runs) {
        const auto s = solve_profile(law, config(eps), d);
        const JumpTable t = detect_jumps(s, law, eps);
        for (const auto& j : t.jumps) {
            ++count;
            worst = std::max(worst, j.rh_total() / (20 * eps * (1 + std::abs(j.s))));
        }
        sum_err = std::max(sum_err, std::abs(t.jump_sum + t.smooth_sum - (d.w_r - d.w_l)));
    }
    v.note << " jumps=" << count << " max residual/bound=" << worst << " sum rule err=" << sum_err;
    v.expect(count > 0, "no jumps detected");
    v.expect(worst <= 1.0, "RH residual");
    v.expect(sum_err <= 1e-6, "sum rule");
}

void oracle_equivalence(Verdict& v) {
    const StressLaw law = StressLaw::linear(2.0);
    const RiemannData d{0, 0, 0, 1};
    const auto t0 = Clock::now();
    const auto sol = solve_profile(law, config(0.02), d);
    std::vector<double> l1;
    for (double T : {2.0, 4.0}) {
        const auto ev = evolve(law, d, 0.02, 0.0, 6.0 * T, T, 0.4, 0.01);
        l1.push_back(self_similar_compare(ev, sol).l1_w);
        v.expect(ev.mass_w_defect < 1e-9, "conservation");
    }
    const double dt = seconds_since(t0);
    v.note << " L1(T=2)=" << l1[0] << " L1(T=4)=" << l1[1] << " ratio=" << l1[1] / l1[0] << " (" << dt << "s)";
    v.expect(l1[0] <= 0.05 * std::abs(d.w_r - d.w_l), "distance");
    v.expect(l1[1] / l1[0] <= 0.8, "ratio");
    v.expect(dt < 60.0, "runtime");
}

void capillary_consistency(Verdict& v) {
    const StressLaw law = StressLaw::hardening();
    const RiemannData d{0.3, -0.5, -0.2, 0.4};
    const double eps = 0.02;
    auto run = [&](double gamma) {
        SolverConfig c = config(eps, gamma);
        c.L = 4.0;
        return solve_profile(law, c, d);
    };
    const auto s = run(0.125);
    const double w64 = run(1.0 / 64).w_star, w128 = run(1.0 / 128).w_star;
    const double w0 = 2.0 * w128 - w64; // linear extrapolation in gamma
    const double bound = std::max(s.phi_minus.phi_error_bound, s.phi_plus.phi_error_bound);
    v.note << " |w*(1/8)-w*(0+)|=" << std::abs(s.w_star - w0) << " estimator=" << bound;
    v.expect(std::abs(s.w_star - w0) <= 10 * eps, "extrapolated middle state");
    v.expect(bound < 0.1, "Phi estimator");
}

void boundary_solver(Verdict& v) {
    const StressLaw law = StressLaw::linear(2.0);
    std::vector<double> cs;
    for (double eps : {0.04, 0.02, 0.01}) {
        const auto s = solve_boundary(law, config(eps), {1.0, 0.0, 0.0});
        const double v0 = s.v0_trace.value_or(NAN);
        v.note << " v(0)+2=" << v0 + 2.0;
        v.expect(std::abs(v0 + 2.0) <= 5 * eps, "trace");
        cs.push_back(boundary_layer_check(s).C);
    }
    v.note << " C=" << cs[0] << "," << cs[1] << "," << cs[2];
    v.expect(boundary_layer_free(cs), "boundary layer constant");
}

void phase_diagnostics(Verdict& v) {
    const StressLaw law = StressLaw::cubic();
    const RiemannData d{0.0, -1.2, 0.0, 1.0};
    const double eps = 0.01, gamma = 0.01;
    const double d0 = delta_cutoff(1.0, gamma);
    v.expect(std::abs(d0 - oracle::excision_radius(1.0, gamma)) <= 1e-12, "delta0");
    for (double g : {1e-3, 0.05, 0.2})
        v.expect(std::abs(delta_cutoff(law.c_lower(), g) - oracle::excision_radius(law.c_lower(), g)) <= 1e-12, "delta0");
    std::vector<SelfSimilarSolution> seq;
    for (int j = 0; j <= 3; ++j) seq.push_back(solve_excised(law, config(eps), d, d0 / (1 << j)));
    const auto rep = concentration_diagnostics(seq);
    for (const auto& s : seq) {
        const double cap = std::abs(d.v_r - d.v_l) + variation_constant(s, law, eps) * std::abs(d.w_r - d.w_l);
        v.expect(s.tv_v <= cap, "tv_v");
    }
    v.note << " sup|yw|=" << rep.sup_yw.front() << ".." << rep.sup_yw.back() << " weighted TV=" << rep.weighted_tv.front()
           << ".." << rep.weighted_tv.back() << (rep.tv_w_growing ? " (tv_w grows)" : "");
    v.expect(rep.sup_yw_bounded, "sup|yw|");
    v.expect(rep.weighted_tv_bounded, "weighted TV");
}

Mat rotation(double th) {
    Mat r(2, 2);
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return r;
}

void eigen_suite(Verdict& v) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double red = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + t % 3;
        Mat S = Mat::Identity(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (i != k) S(i, k) = 0.3 * U(rng);
        Vec lam(n);
        for (int i = 0; i < n; ++i) lam[i] = -3.0 + 2.0 * i + 0.2 * U(rng);
        const Mat A = S * lam.asDiagonal() * S.inverse();
        const double y = 2.0 * U(rng);
        const PencilResult p = generalized_eigen(A, Mat::Identity(n, n), y);
        const EigenFrame f = standard_eigen(A);
        for (int j = 0; j < n; ++j) red = std::max(red, std::abs(p.mu[j] - (f.lambda[j] - y)));
    }
    v.expect(red <= 1e-12, "B=I reduction");

    int accepted = 0;
    double worst = 0.0;
    for (int tries = 0; accepted < 1000 && tries < 100000; ++tries) {
        Mat S(2, 2), B(2, 2);
        S << 1.0, 0.4 * U(rng), 0.4 * U(rng), 1.0;
        const Vec lam = (Vec(2) << -1.0 + 0.5 * U(rng), 1.5 + 0.5 * U(rng)).finished();
        const Mat A = S * lam.asDiagonal() * S.inverse();
        B << 1.0 + 0.3 * U(rng), 0.4 * U(rng), 0.4 * U(rng), 1.0 + 0.3 * U(rng);
        DiffusionSystem sys;
        sys.A = [A](const Vec&) { return A; };
        sys.B = [B](const Vec&) { return B; };
        const auto adm = admissibility_check(sys, {Vec::Zero(2)}).front();
        if (!adm.admissible()) continue;
        const double y = 2.0 * U(rng);
        const EigenFrame f = standard_eigen(A);
        const auto [m1, m2] = two_by_two_closed_form(adm.b, f.lambda[0], f.lambda[1], y);
        const auto ref = oracle::pencil_roots({A(0, 0), A(0, 1), A(1, 0), A(1, 1)}, {B(0, 0), B(0, 1), B(1, 0), B(1, 1)}, y);
        worst = std::max({worst, std::abs(m1 - ref[0]) / std::max(1.0, std::abs(ref[0])),
                          std::abs(m2 - ref[1]) / std::max(1.0, std::abs(ref[1]))});
        ++accepted;
    }
    v.expect(accepted == 1000, "admissible samples");
    v.expect(worst <= 1e-10, "closed form");

    Mat T(2, 2);
    T << 0.0, 1.0, 1.0, 0.0;
    const Mat A = rotation(0.5) * Vec((Vec(2) << 1.0, 7.0).finished()).asDiagonal() * rotation(0.5).transpose();
    const auto rep = perturbation_scaling(A, T, 0.5, {0.1, 0.05, 0.025});
    for (double s : {rep.slope_mu, rep.slope_r, rep.slope_l, rep.slope_coupling}) v.expect(s >= 0.9 && s <= 1.1, "slope");

    const StressLaw law = StressLaw::hardening();
    const DiffusionSystem sys = p_system(law, [T](const Vec&) { return Mat(Mat::Identity(2, 2) + 0.05 * T); });
    int agree = 0;
    for (int k = 0; k < 50; ++k) {
        const double wm = 0.3 + 0.01 * k, amp = 0.05 + 0.006 * k;
        const double wp = k % 4 < 2 ? wm - amp : wm + amp;
        agree += lax_equivalence(sys, p_system_shock(law, 0.1, wm, wp, k % 2)).agree();
    }
    v.expect(agree == 50, "Lax agreement");
    v.note << " reduction err=" << red << " closed-form err=" << worst << " slopes=" << rep.slope_mu << ","
           << rep.slope_r << "," << rep.slope_l << "," << rep.slope_coupling << " Lax agree=" << agree << "/50";
}

void n_system(Verdict& v) {
    const FluxSystem sys = FluxSystem::from_expressions({"1.44*w1 + 0.5*w1*w2", "4.84*w2 + 0.25*w1^2"});
    const ProfileGrid g = make_half_line_grid(6.0, 2001);
    auto profile = [&](double amp) {
        std::vector<Vec> w(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            w[i] = Vec(2);
            w[i] << amp * std::tanh((g.y[i] - 1.2) / 0.1), 0.7 * amp * std::tanh((g.y[i] - 2.2) / 0.15);
        }
        return w;
    };
    const auto dec = decompose(sys, g.y, profile(0.02));
    const double res = dec.reconstruction_residual();
    std::vector<double> amps, norms;
    for (double a : {0.02, 0.01, 0.005}) {
        const auto d = decompose(sys, g.y, profile(a));
        const Sources s = assemble_sources(sys, d, 0.01, 0.125);
        amps.push_back(a);
        norms.push_back(s.l1_norm(g.y, s.D1));
    }
    const double slope = detail::loglog_slope(amps, norms);
    const HalfAxis h = half_axis(g, Side::plus);
    const double cross = cross_mass(family_wave_measure(dec.lambda[0], h, 0.01, 0.0),
                                    family_wave_measure(dec.lambda[1], h, 0.01, 0.0));
    v.note << " residual=" << res << " D1 slope=" << slope << " cross-mass=" << cross;
    v.expect(res <= 1e-10, "reconstruction");
    v.expect(std::abs(slope - 2.0) <= 0.1, "D1 slope");
    v.expect(cross < 1e-3, "cross-mass");
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria = {
        {"linear middle state", linear_middle_state},
        {"TV bounds", tv_bounds},
        {"measure invariants", measure_invariants},
        {"Rankine-Hugoniot closure", rankine_hugoniot},
        {"oracle equivalence", oracle_equivalence},
        {"capillary consistency", capillary_consistency},
        {"boundary solver", boundary_solver},
        {"phase diagnostics", phase_diagnostics},
        {"eigen suite", eigen_suite},
        {"N-system machinery", n_system},
    };
    int failed = 0, k = 0;
    for (const auto& [name, fn] : criteria) {
        Verdict v;
        try {
            fn(v);
        } catch (const std::exception& e) {
            v.ok = false;
            v.note << " exception: " << e.what();
        }
        failed += !v.ok;
        std::printf("%s %2d %s:%s\n", v.ok ? "PASS" : "FAIL", ++k, name, v.note.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", k - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
