#pragma once

#include "selfsim/constitutive.hpp"
#include "selfsim/riemann_solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace selfsim {

/// Time-dependent regularized p-system with coefficients scaled so that
/// Riemann data stays self-similar:
///   w_t = v_x,   v_t = (sigma(w) + eps t v_x - delta t^2 w_xx)_x.
/// Staggered layout: w at cell centres, v at cell interfaces x_j = -X + j h.
struct OracleConfig {
    double eps = 0.02;
    double delta = 0.0;
    double X = 12.0;
    double t_final = 2.0;
    double cfl = 0.4;
    double h = 0.01;
};

struct OracleResult {
    double t = 0.0;
    double h = 0.0;
    std::vector<double> xc;   ///< cell centres (w)
    std::vector<double> xf;   ///< interfaces (v)
    std::vector<double> w, v;
    std::size_t steps = 0;
    double mass_w_defect = 0.0;  ///< relative |int w(t) - int w(0) - boundary flux|
    double mass_v_defect = 0.0;
};

namespace detail {

inline double max_speed(const StressLaw& law, const std::vector<double>& w) {
    double m = 0.0;
    for (double x : w) m = std::max(m, law.deriv(x));
    return std::sqrt(m);
}

inline double smooth_step(double xi) { // C^1 ramp on [-1, 1]
    if (xi <= -1.0) return 0.0;
    if (xi >= 1.0) return 1.0;
    return 0.5 + 0.75 * xi - 0.25 * xi * xi * xi;
}

} // namespace detail

inline OracleResult evolve(const StressLaw& law, const RiemannData& d, const OracleConfig& cfg) {
    require(cfg.eps >= 0.0 && cfg.delta >= 0.0, "eps and delta must be non-negative");
    require(cfg.X > 0.0 && cfg.h > 0.0 && cfg.t_final > 0.0, "X, h and t_final must be positive");
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0))
        throw SolverError(ErrorCode::cfl_violation, "cfl must lie in (0, 1]");
    const std::size_t N = static_cast<std::size_t>(std::llround(2.0 * cfg.X / cfg.h));
    require(N >= 16, "domain needs at least 16 cells");
    const double h = 2.0 * cfg.X / static_cast<double>(N);

    const double c0 = law.c0();
    const double lambda0 = std::max(std::abs(d.w_l), std::abs(d.w_r)) +
                           (c0 > 0.0 ? std::abs(d.v_r - d.v_l) / c0 : std::abs(d.v_r - d.v_l));
    {
        double smax = std::max(law.deriv(d.w_l), law.deriv(d.w_r));
        for (int k = 0; k <= 200; ++k) smax = std::max(smax, law.deriv(-lambda0 + 2.0 * lambda0 * k / 200.0));
        const double lmax = std::sqrt(std::max(smax, 0.0));
        if (lmax * cfg.t_final >= 0.9 * cfg.X)
            throw SolverError(ErrorCode::cfl_violation, "waves reach the boundary: max|lambda| t_final = " +
                                                            std::to_string(lmax * cfg.t_final) + " >= 0.9 X");
    }

    OracleResult r;
    r.h = h;
    r.xc.resize(N);
    r.xf.resize(N + 1);
    for (std::size_t i = 0; i < N; ++i) r.xc[i] = -cfg.X + (static_cast<double>(i) + 0.5) * h;
    for (std::size_t j = 0; j <= N; ++j) r.xf[j] = -cfg.X + static_cast<double>(j) * h;
    // Data ramped over 4 cells.
    std::vector<double> w(N), v(N + 1);
    for (std::size_t i = 0; i < N; ++i) w[i] = d.w_l + (d.w_r - d.w_l) * detail::smooth_step(r.xc[i] / (2.0 * h));
    for (std::size_t j = 0; j <= N; ++j) v[j] = d.v_l + (d.v_r - d.v_l) * detail::smooth_step(r.xf[j] / (2.0 * h));
    v.front() = d.v_l;
    v.back() = d.v_r;

    auto sum_w = [&](const std::vector<double>& a) {
        double s = 0.0;
        for (double x : a) s += x;
        return s * h;
    };
    auto sum_v = [&](const std::vector<double>& a) {
        double s = 0.0;
        for (std::size_t j = 1; j < N; ++j) s += a[j];
        return s * h;
    };
    const double w0 = sum_w(w), v0 = sum_v(v);
    double flux_w = 0.0, flux_v = 0.0;

    std::vector<double> G(N), dw(N), dv(N + 1);
    // Returns boundary fluxes (for int w, for int v) of the current stage.
    auto rhs = [&](const std::vector<double>& W, const std::vector<double>& V, double t) {
        const double mu = cfg.eps * t, kap = cfg.delta * t * t;
        for (std::size_t i = 0; i < N; ++i) {
            const double wm = i > 0 ? W[i - 1] : d.w_l;
            const double wp = i + 1 < N ? W[i + 1] : d.w_r;
            G[i] = law.sigma(W[i]) + mu * (V[i + 1] - V[i]) / h - kap * (wp - 2.0 * W[i] + wm) / (h * h);
        }
        for (std::size_t i = 0; i < N; ++i) dw[i] = (V[i + 1] - V[i]) / h;
        dv.front() = dv.back() = 0.0;
        for (std::size_t j = 1; j < N; ++j) dv[j] = (G[j] - G[j - 1]) / h;
        return std::pair<double, double>{V[N] - V[0], G[N - 1] - G[0]};
    };

    std::vector<double> w1(N), v1(N + 1), w2(N), v2(N + 1);
    double t = 0.0;
    while (t < cfg.t_final) {
        const double te = std::max(t, 1e-300);
        const double lam = std::max(detail::max_speed(law, w), 1e-12);
        double dt = h / lam;
        if (cfg.eps > 0.0) dt = std::min(dt, h * h / (2.0 * cfg.eps * std::max(cfg.t_final, te)));
        if (cfg.delta > 0.0) dt = std::min(dt, h * h * h * h / (8.0 * cfg.delta * cfg.t_final * cfg.t_final));
        dt *= cfg.cfl;
        if (t + dt > cfg.t_final) dt = cfg.t_final - t;
        // SSP-RK3 with boundary fluxes accumulated at the same weights.
        auto f0 = rhs(w, v, t);
        for (std::size_t i = 0; i < N; ++i) w1[i] = w[i] + dt * dw[i];
        for (std::size_t j = 0; j <= N; ++j) v1[j] = v[j] + dt * dv[j];
        auto f1 = rhs(w1, v1, t + dt);
        for (std::size_t i = 0; i < N; ++i) w2[i] = 0.75 * w[i] + 0.25 * (w1[i] + dt * dw[i]);
        for (std::size_t j = 0; j <= N; ++j) v2[j] = 0.75 * v[j] + 0.25 * (v1[j] + dt * dv[j]);
        auto f2 = rhs(w2, v2, t + 0.5 * dt);
        for (std::size_t i = 0; i < N; ++i) w[i] = w[i] / 3.0 + 2.0 / 3.0 * (w2[i] + dt * dw[i]);
        for (std::size_t j = 0; j <= N; ++j) v[j] = v[j] / 3.0 + 2.0 / 3.0 * (v2[j] + dt * dv[j]);
        flux_w += dt * (f0.first + f1.first + 4.0 * f2.first) / 6.0;
        flux_v += dt * (f0.second + f1.second + 4.0 * f2.second) / 6.0;
        t += dt;
        ++r.steps;
        for (double x : w)
            if (!std::isfinite(x) || std::abs(x) > 10.0 * lambda0 + 1e-12)
                throw SolverError(ErrorCode::blowup_detected,
                                  "|w| exceeded 10 Lambda0 at t = " + std::to_string(t));
    }
    r.t = t;
    const double sw = sum_w(w), sv = sum_v(v);
    r.mass_w_defect = std::abs(sw - w0 - flux_w) / std::max({std::abs(w0), std::abs(sw), 1.0});
    r.mass_v_defect = std::abs(sv - v0 - flux_v) / std::max({std::abs(v0), std::abs(sv), 1.0});
    r.w = std::move(w);
    r.v = std::move(v);
    return r;
}

inline OracleResult evolve(const StressLaw& law, const RiemannData& d, double eps, double delta, double X,
                           double t_final, double cfl, double h = 0.01) {
    return evolve(law, d, OracleConfig{eps, delta, X, t_final, cfl, h});
}

struct OracleComparison {
    double l1_w = 0.0;
    double l1_v = 0.0;
    std::vector<double> y;          ///< solver nodes used
    std::vector<double> w_evolved;  ///< evolved w resampled at x = y t
    std::vector<double> v_evolved;
};

namespace detail {

inline double interp(const std::vector<double>& x, const std::vector<double>& f, double at) {
    if (at <= x.front()) return f.front();
    if (at >= x.back()) return f.back();
    const auto it = std::upper_bound(x.begin(), x.end(), at);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double th = (at - x[k - 1]) / (x[k] - x[k - 1]);
    return (1.0 - th) * f[k - 1] + th * f[k];
}

} // namespace detail

/// L1 distance in y over |y| > r0 (and x = y t inside the evolved domain).
inline OracleComparison self_similar_compare(const OracleResult& ev, const SelfSimilarSolution& sol, double r0 = 0.0) {
    OracleComparison c;
    const auto& g = sol.grid;
    const double xmax = ev.xc.back();
    std::vector<double> dw, dv;
    for (std::size_t i = 0; i < g.size(); ++i) {
        c.y.push_back(g.y[i]);
        c.w_evolved.push_back(detail::interp(ev.xc, ev.w, g.y[i] * ev.t));
        c.v_evolved.push_back(detail::interp(ev.xf, ev.v, g.y[i] * ev.t));
        dw.push_back(std::abs(c.w_evolved.back() - g.w[i]));
        dv.push_back(std::abs(c.v_evolved.back() - g.v[i]));
    }
    for (std::size_t i = 1; i < g.size(); ++i) {
        const double ym = 0.5 * (g.y[i] + g.y[i - 1]);
        if (std::abs(ym) <= r0 || std::abs(ym) * ev.t > xmax) continue;
        if (g.y[i] - g.y[i - 1] > 1.5 * g.spacing()) continue;
        const double hy = g.y[i] - g.y[i - 1];
        c.l1_w += 0.5 * hy * (dw[i] + dw[i - 1]);
        c.l1_v += 0.5 * hy * (dv[i] + dv[i - 1]);
    }
    return c;
}

} // namespace selfsim
