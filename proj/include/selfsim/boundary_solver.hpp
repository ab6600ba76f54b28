#pragma once

#include "selfsim/riemann_solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace selfsim {

struct BoundaryData {
    double w_b = 0.0;
    double v_r = 0.0;
    double w_r = 0.0;
};

/// Half-line problem on [0, L]: w(0) = w_b, w(L) = w_r, v(L) = v_r. A single
/// plus-side measure closes it,
///   w(y) = w_b - (w_b - w_r) int_0^y phi_+,   v(y) = v_r - (w_b - w_r) int_y^L x phi_+.
inline SelfSimilarSolution solve_boundary(const StressLaw& law, const SolverConfig& cfg, const BoundaryData& d) {
    cfg.validate();
    require(std::isfinite(d.w_b) && std::isfinite(d.v_r) && std::isfinite(d.w_r), "boundary data must be finite");
    require(law.uniformly_hyperbolic(), "boundary problem needs a uniformly hyperbolic law");
    const std::size_t n = (cfg.n_nodes + 1) / 2;
    SelfSimilarSolution sol;
    sol.grid = make_half_line_grid(cfg.L, n);
    const double c = std::sqrt(std::max(law.deriv(0.5 * (d.w_b + d.w_r)), law.c0_sq()));
    for (std::size_t i = 0; i < n; ++i) sol.grid.w[i] = sol.grid.y[i] < c ? d.w_b : d.w_r;
    sol.grid.w.front() = d.w_b;
    sol.grid.w.back() = d.w_r;

    const double jump = d.w_b - d.w_r;
    ProfileGrid work = sol.grid;
    auto measure = [&](const ProfileGrid& g) { return build_phi(law, g, cfg.eps, cfg.gamma, Side::plus); };
    auto map = [&](const std::vector<double>& w) {
        work.w = w;
        const WaveMeasure m = measure(work);
        std::vector<double> next(w.size());
        for (std::size_t k = 0; k < m.size(); ++k) next[m.index[k]] = d.w_r + jump * m.tail[k];
        next.front() = d.w_b;
        next.back() = d.w_r;
        detail::check_finite(next);
        return next;
    };
    IterationLog log = fixed_point(sol.grid.w, cfg, map);
    sol.converged = log.converged;
    sol.iterations = log.iterations;
    sol.final_change = log.final_change;
    sol.final_damping = log.theta;
    sol.history = std::move(log.history);

    const WaveMeasure m = measure(sol.grid);
    // v from the first-moment tail of the measure.
    std::vector<double> xm(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) xm[k] = m.x[k] * m.density[k];
    double tail = 0.0;
    sol.grid.v.assign(n, d.v_r);
    for (std::size_t k = n - 1; k-- > 0;) {
        tail += 0.5 * (m.x[k + 1] - m.x[k]) * (xm[k] + xm[k + 1]);
        sol.grid.v[k] = d.v_r - jump * tail;
    }
    sol.phi_plus = m;
    sol.rho_candidates_plus = m.rho_candidates;
    sol.w_star = d.w_b;
    sol.v_star = sol.grid.v.front();
    sol.v0_trace = sol.grid.v.front();
    sol.denominator_D = m.first_moment;
    sol.tv_w = sol.tv_v = sol.weighted_tv_w = 0.0;
    double smin = std::numeric_limits<double>::infinity(), smax = -smin;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double dw = std::abs(sol.grid.w[i] - sol.grid.w[i - 1]);
            sol.tv_w += dw;
            sol.tv_v += std::abs(sol.grid.v[i] - sol.grid.v[i - 1]);
            sol.weighted_tv_w += 0.5 * (sol.grid.y[i] + sol.grid.y[i - 1]) * dw;
        }
        smin = std::min(smin, law.deriv(sol.grid.w[i]));
        smax = std::max(smax, law.deriv(sol.grid.w[i]));
    }
    const double shift = cfg.gamma > 0.0 ? 0.5 * cfg.eps : cfg.eps;
    sol.lambda_M = std::sqrt(std::max(smax - shift, 0.0));
    sol.lambda_m = std::sqrt(std::max(smin - shift, 0.0));
    sol.phi_error_bound = m.phi_error_bound;
    // Closure defect: v' = -y w' integrated from L back to 0 against the stored v(0).
    double v0 = d.v_r;
    for (std::size_t i = n - 1; i > 0; --i)
        v0 += 0.5 * (sol.grid.y[i] + sol.grid.y[i - 1]) * (sol.grid.w[i] - sol.grid.w[i - 1]);
    sol.conservation_defect = std::abs(v0 - sol.grid.v.front());
    sol.residual_ode = ode_residual(sol, law, cfg);
    if (!sol.converged)
        throw NotConverged("boundary problem: no convergence after " + std::to_string(cfg.max_iter) + " iterations",
                           std::make_shared<SelfSimilarSolution>(sol));
    return sol;
}

struct BoundaryLayerFit {
    double C = 0.0;        ///< max |w(y) - w_b| / y over 0 < y <= lambda_m / 4
    double worst_y = 0.0;
};

inline BoundaryLayerFit boundary_layer_check(const SelfSimilarSolution& sol) {
    BoundaryLayerFit fit;
    const auto& g = sol.grid;
    const double wb = g.w.front();
    const double ymax = 0.25 * sol.lambda_m;
    for (std::size_t i = 1; i < g.size() && g.y[i] <= ymax; ++i) {
        const double r = std::abs(g.w[i] - wb) / g.y[i];
        if (r > fit.C) {
            fit.C = r;
            fit.worst_y = g.y[i];
        }
    }
    return fit;
}

/// Consecutive ratios of fitted constants across an eps-halving sweep; the
/// layer-free verdict asks every ratio to stay <= 2.
inline bool boundary_layer_free(const std::vector<double>& constants, double max_ratio = 2.0) {
    for (std::size_t i = 1; i < constants.size(); ++i) {
        const double a = constants[i - 1], b = constants[i];
        if (a == 0.0 && b == 0.0) continue;
        if (a == 0.0 || b / a > max_ratio) return false;
    }
    return true;
}

} // namespace selfsim
