#pragma once

#include "selfsim/constitutive.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/grid.hpp"
#include "selfsim/wave_measure.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace selfsim {

struct RiemannData {
    double v_l = 0.0;
    double w_l = 0.0;
    double v_r = 0.0;
    double w_r = 0.0;
};

struct SolverConfig {
    double eps = 0.01;
    double gamma = 0.0;          ///< capillarity ratio; delta = gamma eps^2
    double L = 6.0;
    std::size_t n_nodes = 4001;
    double excision_delta = 0.0;
    double damping = 1.0;
    double tol = 1e-10;
    int max_iter = 400;
    double min_damping = 1.0 / 64.0;
    int anderson_depth = 5;      ///< 0 gives plain damped Picard

    double capillarity() const { return gamma * eps * eps; }
    void validate() const {
        require(eps > 0.0 && std::isfinite(eps), "eps must be positive");
        require(gamma >= 0.0 && gamma < 0.25, "gamma must lie in [0, 1/4)");
        require(L > 0.0 && n_nodes >= 5, "need L > 0 and at least 5 nodes");
        require(excision_delta >= 0.0 && excision_delta < L, "excision delta must lie in [0, L)");
        require(damping > 0.0 && damping <= 1.0, "damping must lie in (0, 1]");
        require(tol > 0.0 && max_iter > 0, "tol and max_iter must be positive");
    }
};

struct MiddleState {
    double w_star = 0.0;
    double v_star = 0.0;     ///< from the subtracted closure
    double D = 0.0;          ///< int y phi_+ - int y phi_-
    double m_plus = 0.0;     ///< int y phi_+ dy
    double m_minus = 0.0;    ///< int y phi_- dy (negative)
    double bound = 0.0;      ///< max(|w_l|, |w_r|) + |v_r - v_l| / D
    bool within_bound = true;
};

/// Gluing value at the axis from the integral closure of v' = -y w'.
inline MiddleState middle_state(const WaveMeasure& minus, const WaveMeasure& plus, const RiemannData& d) {
    MiddleState ms;
    ms.m_plus = plus.signed_moment();
    ms.m_minus = minus.signed_moment();
    ms.D = ms.m_plus - ms.m_minus;
    if (!(ms.D >= 1e-8))
        throw SolverError(ErrorCode::denominator_collapse,
                          "moment denominator D = " + std::to_string(ms.D) + " < 1e-8");
    const double dv = d.v_r - d.v_l;
    ms.w_star = (dv + d.w_r * ms.m_plus - d.w_l * ms.m_minus) / ms.D;
    ms.v_star = d.v_l + (dv + (d.w_r - d.w_l) * ms.m_plus) * (-ms.m_minus) / ms.D;
    ms.bound = std::max(std::abs(d.w_l), std::abs(d.w_r)) + std::abs(dv) / ms.D;
    ms.within_bound = std::abs(ms.w_star) <= ms.bound * (1.0 + 1e-12);
    return ms;
}

struct SelfSimilarSolution {
    ProfileGrid grid;
    double w_star = 0.0;
    double v_star = 0.0;
    double tv_w = 0.0;
    double tv_v = 0.0;
    double weighted_tv_w = 0.0;  ///< int |y| |dw|
    double sup_yw = 0.0;         ///< sup |y w| over delta <= |y| <= 1
    double conservation_defect = 0.0;
    double residual_ode = 0.0;
    double denominator_D = 0.0;
    double lambda_M = 0.0;       ///< sqrt(max sigma_w - shift) over the profile
    double lambda_m = 0.0;
    double phi_error_bound = 0.0;
    double final_change = 0.0;
    double final_damping = 1.0;
    int iterations = 0;
    bool converged = false;
    bool middle_bound_ok = true;
    std::vector<double> history;
    WaveMeasure phi_minus;
    WaveMeasure phi_plus;
    std::vector<double> rho_candidates_minus, rho_candidates_plus;
    std::optional<double> v0_trace; ///< boundary problem only

    double rho_minus() const { return phi_minus.rho; }
    double rho_plus() const { return phi_plus.rho; }
};

/// not_converged with the last iterate attached.
class NotConverged : public SolverError {
public:
    NotConverged(const std::string& what, std::shared_ptr<SelfSimilarSolution> partial)
        : SolverError(ErrorCode::not_converged, what), partial_(std::move(partial)) {}
    const SelfSimilarSolution& partial() const { return *partial_; }

private:
    std::shared_ptr<SelfSimilarSolution> partial_;
};

struct TStep {
    ProfileGrid next;
    WaveMeasure minus;
    WaveMeasure plus;
    MiddleState middle;
};

namespace detail {

inline void check_finite(const std::vector<double>& w) {
    for (double x : w)
        if (!std::isfinite(x)) throw SolverError(ErrorCode::nan_detected, "non-finite value in profile");
}

} // namespace detail

/// One application of the fixed-point map: measures from the current w, w*,
/// then the representation on both half-axes.
inline TStep apply_T_full(const ProfileGrid& current, const StressLaw& law, const SolverConfig& cfg,
                          const RiemannData& d) {
    detail::check_finite(current.w);
    TStep st{current, build_phi(law, current, cfg.eps, cfg.gamma, Side::minus),
             build_phi(law, current, cfg.eps, cfg.gamma, Side::plus), {}};
    st.middle = middle_state(st.minus, st.plus, d);
    const double ws = st.middle.w_star;
    auto& w = st.next.w;
    for (std::size_t k = 0; k < st.minus.size(); ++k)
        w[st.minus.index[k]] = d.w_l + (ws - d.w_l) * st.minus.tail[k];
    for (std::size_t k = 0; k < st.plus.size(); ++k)
        w[st.plus.index[k]] = d.w_r + (ws - d.w_r) * st.plus.tail[k];
    w.front() = d.w_l;
    w.back() = d.w_r;
    detail::check_finite(w);
    return st;
}

inline ProfileGrid apply_T(const ProfileGrid& current, const StressLaw& law, const SolverConfig& cfg,
                           const RiemannData& d) {
    return apply_T_full(current, law, cfg, d).next;
}

/// v(y) = v_l + int_{-L}^y (-x) w'(x) dx by trapezoid on nodal increments.
/// Returns |v(L) - v_r|.
inline double reconstruct_v(ProfileGrid& g, const RiemannData& d) {
    g.v.assign(g.size(), d.v_l);
    for (std::size_t i = 1; i < g.size(); ++i)
        g.v[i] = g.v[i - 1] - 0.5 * (g.y[i] + g.y[i - 1]) * (g.w[i] - g.w[i - 1]);
    return std::abs(g.v.back() - d.v_r);
}

/// Linear-law Riemann fan with c = sqrt(sigma_w) at the average state (or the
/// law's c0 when that is elliptic), smoothed by one (1/4, 1/2, 1/4) pass.
inline std::vector<double> initial_guess(const StressLaw& law, const ProfileGrid& g, const RiemannData& d) {
    double c2 = law.deriv(0.5 * (d.w_l + d.w_r));
    if (!(c2 > 0.0)) c2 = std::max({law.deriv(d.w_l), law.deriv(d.w_r), law.c0_sq(), 1e-2});
    const double c = std::sqrt(c2);
    const double ws = 0.5 * (d.w_l + d.w_r) + (d.v_r - d.v_l) / (2.0 * c);
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = g.y[i] < -c ? d.w_l : g.y[i] > c ? d.w_r : ws;
    std::vector<double> s = w;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) s[i] = 0.25 * w[i - 1] + 0.5 * w[i] + 0.25 * w[i + 1];
    s.front() = d.w_l;
    s.back() = d.w_r;
    return s;
}

/// (y^2 + eps - sigma_w) w' + eps y w'' + delta w''' summed as an L1 norm over
/// interior nodes, skipping the three nodes nearest the axis on each side.
inline double ode_residual(const SelfSimilarSolution& sol, const StressLaw& law, const SolverConfig& cfg) {
    const ProfileGrid& g = sol.grid;
    const double delta = cfg.capillarity();
    double total = 0.0;
    for (Side side : {Side::minus, Side::plus}) {
        if (side == Side::minus && !g.has_minus()) continue;
        const HalfAxis h = half_axis(g, side);
        const std::size_t n = h.size();
        if (n < 8) continue;
        const double hx = h.x[1] - h.x[0];
        auto w = gather(h, g.w);
        // Outward derivatives; the equation is invariant under y -> -y.
        for (std::size_t k = 3; k + 2 < n; ++k) {
            const double x = h.x[k];
            const double d1 = (w[k + 1] - w[k - 1]) / (2.0 * hx);
            const double d2 = (w[k + 1] - 2.0 * w[k] + w[k - 1]) / (hx * hx);
            const double d3 = (w[k + 2] - 2.0 * w[k + 1] + 2.0 * w[k - 1] - w[k - 2]) / (2.0 * hx * hx * hx);
            const double r = (x * x + cfg.eps - law.deriv(w[k])) * d1 + cfg.eps * x * d2 + delta * d3;
            total += std::abs(r) * hx;
        }
    }
    return total;
}

namespace detail {

inline void fill_report(SelfSimilarSolution& sol, const StressLaw& law, const SolverConfig& cfg,
                        const RiemannData& d, const TStep& st) {
    ProfileGrid& g = sol.grid;
    sol.w_star = st.middle.w_star;
    sol.denominator_D = st.middle.D;
    sol.phi_minus = st.minus;
    sol.phi_plus = st.plus;
    sol.rho_candidates_minus = st.minus.rho_candidates;
    sol.rho_candidates_plus = st.plus.rho_candidates;
    sol.conservation_defect = reconstruct_v(g, d);
    sol.v_star = g.delta > 0.0 ? st.middle.v_star : g.v[g.first_plus];
    sol.tv_w = sol.tv_v = sol.weighted_tv_w = sol.sup_yw = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        const double dw = std::abs(g.w[i] - g.w[i - 1]);
        sol.tv_w += dw;
        sol.tv_v += std::abs(g.v[i] - g.v[i - 1]);
        sol.weighted_tv_w += 0.5 * (std::abs(g.y[i]) + std::abs(g.y[i - 1])) * dw;
    }
    double smin = std::numeric_limits<double>::infinity(), smax = -smin;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double ay = std::abs(g.y[i]);
        if (ay >= g.delta && ay <= 1.0) sol.sup_yw = std::max(sol.sup_yw, ay * std::abs(g.w[i]));
        smin = std::min(smin, law.deriv(g.w[i]));
        smax = std::max(smax, law.deriv(g.w[i]));
    }
    const double shift = cfg.gamma > 0.0 ? 0.5 * cfg.eps : cfg.eps;
    sol.lambda_M = std::sqrt(std::max(smax - shift, 0.0));
    sol.lambda_m = std::sqrt(std::max(smin - shift, 0.0));
    sol.phi_error_bound = std::max(st.minus.phi_error_bound, st.plus.phi_error_bound);
    sol.residual_ode = ode_residual(sol, law, cfg);
}

} // namespace detail

struct IterationLog {
    bool converged = false;
    int iterations = 0;
    double final_change = 0.0;
    double theta = 1.0;
    std::vector<double> history;
};

/// Damped Picard iteration w <- w + theta (T(w) - w) with Anderson mixing over
/// the last `anderson_depth` residuals. theta halves (down to min_damping) and
/// the mixing history resets whenever the sup-norm change grows. On success w
/// holds T of the last iterate. Entries 0 and n-1 stay pinned.
template <class Map>
IterationLog fixed_point(std::vector<double>& w, const SolverConfig& cfg, Map&& map) {
    IterationLog log;
    log.theta = cfg.damping;
    const auto n = static_cast<Eigen::Index>(w.size());
    double prev = std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> dX, dF;
    Eigen::VectorXd x_prev, f_prev;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const std::vector<double> tw = map(w);
        Eigen::Map<const Eigen::VectorXd> x(w.data(), n), tx(tw.data(), n);
        const Eigen::VectorXd f = tx - x;
        const double change = f.lpNorm<Eigen::Infinity>();
        log.history.push_back(change);
        log.iterations = it;
        log.final_change = change;
        if (change <= cfg.tol) {
            w = tw;
            log.converged = true;
            return log;
        }
        if (change > prev) {
            log.theta = std::max(cfg.min_damping, log.theta > 0.5 ? 0.5 : 0.5 * log.theta);
            dX.clear();
            dF.clear();
        }
        prev = change;
        Eigen::VectorXd x_new = x + log.theta * f;
        if (cfg.anderson_depth > 0 && x_prev.size() == n) {
            dX.push_back(x - x_prev);
            dF.push_back(f - f_prev);
            if (dX.size() > static_cast<std::size_t>(cfg.anderson_depth)) {
                dX.erase(dX.begin());
                dF.erase(dF.begin());
            }
            const auto m = static_cast<Eigen::Index>(dF.size());
            Eigen::MatrixXd Fm(n, m), Xm(n, m);
            for (Eigen::Index j = 0; j < m; ++j) {
                Fm.col(j) = dF[static_cast<std::size_t>(j)];
                Xm.col(j) = dX[static_cast<std::size_t>(j)];
            }
            const Eigen::VectorXd g = Fm.completeOrthogonalDecomposition().solve(f);
            if (g.allFinite()) x_new -= (Xm + log.theta * Fm) * g;
        }
        x_prev = x;
        f_prev = f;
        const double first = w.front(), last = w.back();
        for (Eigen::Index i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = x_new[i];
        w.front() = first;
        w.back() = last;
    }
    return log;
}

/// Fixed point of T on the grid given by the config (excised when
/// excision_delta > 0), then v reconstruction and the full report.
inline SelfSimilarSolution solve_profile(const StressLaw& law, const SolverConfig& cfg, const RiemannData& d) {
    cfg.validate();
    require(std::isfinite(d.v_l) && std::isfinite(d.w_l) && std::isfinite(d.v_r) && std::isfinite(d.w_r),
            "Riemann data must be finite");
    SelfSimilarSolution sol;
    sol.grid = make_grid(cfg.L, cfg.n_nodes, cfg.excision_delta);
    sol.grid.w = initial_guess(law, sol.grid, d);

    const bool hyperbolic = law.uniformly_hyperbolic();
    const double lambda0 = std::max(std::abs(d.w_l), std::abs(d.w_r)) +
                           (hyperbolic ? std::abs(d.v_r - d.v_l) / law.c0() : 0.0);
    ProfileGrid work = sol.grid;
    auto map = [&](const std::vector<double>& w) {
        work.w = w;
        std::vector<double> next = apply_T_full(work, law, cfg, d).next.w;
        if (hyperbolic) {
            double sup = 0.0;
            for (double x : next) sup = std::max(sup, std::abs(x));
            if (sup > 1.1 * lambda0)
                throw SolverError(ErrorCode::bound_violated, "sup|w| = " + std::to_string(sup) +
                                                                 " exceeds 1.1 * Lambda0 = " +
                                                                 std::to_string(1.1 * lambda0));
        }
        return next;
    };
    IterationLog log = fixed_point(sol.grid.w, cfg, map);
    sol.converged = log.converged;
    sol.iterations = log.iterations;
    sol.final_change = log.final_change;
    sol.final_damping = log.theta;
    sol.history = std::move(log.history);
    detail::fill_report(sol, law, cfg, d, apply_T_full(sol.grid, law, cfg, d));
    const double lm = std::max(sol.lambda_m, 1e-300);
    const double mb = std::max(std::abs(d.w_l), std::abs(d.w_r)) + std::abs(d.v_r - d.v_l) / (2.0 * lm);
    sol.middle_bound_ok = std::abs(sol.w_star) <= 1.1 * mb;
    if (!sol.converged)
        throw NotConverged("no convergence after " + std::to_string(cfg.max_iter) + " iterations (last change " +
                               std::to_string(sol.final_change) + ")",
                           std::make_shared<SelfSimilarSolution>(sol));
    return sol;
}

/// (4 c gamma / (1 - 4 gamma))^(1/2): below this |y| the WKB frequency can
/// vanish for a law with sigma_w >= -c.
inline double delta_cutoff(double c, double gamma) {
    require(c >= 0.0 && gamma > 0.0 && gamma < 0.25, "delta_cutoff needs c >= 0 and 0 < gamma < 1/4");
    return std::sqrt(4.0 * c * gamma / (1.0 - 4.0 * gamma));
}

/// Two half-problems on [-L, -delta] and [delta, L] glued through w* and v*.
inline SelfSimilarSolution solve_excised(const StressLaw& law, SolverConfig cfg, const RiemannData& d,
                                         double delta) {
    require(delta > 0.0, "excised solve needs delta > 0");
    if (cfg.gamma > 0.0) {
        const double d0 = delta_cutoff(law.c_lower(), cfg.gamma);
        if (delta < d0)
            throw SolverError(ErrorCode::delta_below_cutoff,
                              "delta = " + std::to_string(delta) + " < delta0 = " + std::to_string(d0));
    }
    cfg.excision_delta = delta;
    return solve_profile(law, cfg, d);
}

} // namespace selfsim
