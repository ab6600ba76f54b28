#pragma once

#include "selfsim/constitutive.hpp"
#include "selfsim/riemann_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace selfsim {

enum class WaveClass { classical_lax, nonclassical, phase_boundary, marginal };

inline const char* to_string(WaveClass c) {
    switch (c) {
    case WaveClass::classical_lax: return "classical_lax";
    case WaveClass::nonclassical: return "nonclassical";
    case WaveClass::phase_boundary: return "phase_boundary";
    case WaveClass::marginal: return "marginal";
    }
    return "nonclassical";
}

struct JumpRecord {
    double s = 0.0;
    double v_minus = 0.0, w_minus = 0.0, v_plus = 0.0, w_plus = 0.0;
    double rh_mass = 0.0;      ///< |s [w] + [v]|
    double rh_momentum = 0.0;  ///< |s [v] + [sigma(w)]|
    std::size_t begin = 0, end = 0; ///< node range [begin, end] of the jump core
    WaveClass classification = WaveClass::marginal;

    double rh_total() const { return rh_mass + rh_momentum; }
};

struct JumpOptions {
    std::optional<double> threshold; ///< |w'| cut; default 0.1 * scale / sqrt(eps)
    std::size_t plateau_offset = 10; ///< nodes between the core edge and the trace window
    std::size_t min_plateau = 5;
};

struct JumpTable {
    std::vector<JumpRecord> jumps;
    double threshold = 0.0;
    double jump_sum = 0.0;    ///< sum of w increments across jump cores
    double smooth_sum = 0.0;  ///< sum of w increments outside the cores
};

inline double default_jump_threshold(const SelfSimilarSolution& sol, double eps) {
    const auto& w = sol.grid.w;
    const double scale = std::abs(w.back() - w.front()) + std::abs(sol.w_star - w.front());
    return 0.1 * scale / std::sqrt(eps);
}

/// Jump cores are maximal runs of nodes with |w'| above the threshold; traces
/// are averages over [edge - 3p, edge - p] on the left and [edge + p, edge + 3p]
/// on the right (p = plateau_offset nodes), cut short at neighbouring cores or
/// the grid ends. Throws no_plateau when fewer than min_plateau nodes remain.
inline JumpTable detect_jumps(const SelfSimilarSolution& sol, const StressLaw& law, double eps,
                              const JumpOptions& opt = {}) {
    const ProfileGrid& g = sol.grid;
    const std::size_t n = g.size();
    JumpTable table;
    table.threshold = opt.threshold.value_or(default_jump_threshold(sol, eps));
    if (table.threshold <= 0.0) return table;
    std::vector<double> dw(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = g.y[i + 1] - g.y[i];
        dw[i] = h > 1e-12 ? (g.w[i + 1] - g.w[i]) / h : 0.0; // cell slopes; the excision gap has none
    }
    std::vector<std::pair<std::size_t, std::size_t>> cores;
    for (std::size_t i = 0; i + 1 < n;) {
        if (std::abs(dw[i]) <= table.threshold) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n - 1 && std::abs(dw[j + 1]) > table.threshold) ++j;
        cores.emplace_back(i, j + 1); // nodes i..j+1 span cells i..j
        i = j + 1;
    }
    std::size_t prev_end = 0;
    for (std::size_t c = 0; c < cores.size(); ++c) {
        const auto [b, e] = cores[c];
        const std::size_t next_begin = c + 1 < cores.size() ? cores[c + 1].first : n - 1;
        JumpRecord r;
        r.begin = b;
        r.end = e;
        double num = 0.0, den = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            const double wgt = std::abs(g.w[i + 1] - g.w[i]);
            num += wgt * 0.5 * (g.y[i] + g.y[i + 1]);
            den += wgt;
        }
        r.s = num / den;
        // Left window [b - 3p, b - p], right window [e + p, e + 3p].
        const std::size_t p = opt.plateau_offset;
        const std::size_t l_hi = b >= p ? b - p : 0;
        const std::size_t l_lo = std::max<std::size_t>(b >= 3 * p ? b - 3 * p : 0, prev_end);
        const std::size_t r_lo = e + p;
        const std::size_t r_hi = std::min(e + 3 * p, next_begin);
        if (l_hi < l_lo + opt.min_plateau - 1 || b < p || r_lo >= n || r_hi < r_lo + opt.min_plateau - 1)
            throw SolverError(ErrorCode::no_plateau,
                              "plateau next to the jump at s = " + std::to_string(r.s) + " is shorter than " +
                                  std::to_string(opt.min_plateau) + " nodes");
        auto avg = [&](const std::vector<double>& f, std::size_t lo, std::size_t hi) {
            double s = 0.0;
            for (std::size_t i = lo; i <= hi; ++i) s += f[i];
            return s / static_cast<double>(hi - lo + 1);
        };
        r.w_minus = avg(g.w, l_lo, l_hi);
        r.v_minus = avg(g.v, l_lo, l_hi);
        r.w_plus = avg(g.w, r_lo, r_hi);
        r.v_plus = avg(g.v, r_lo, r_hi);
        const double jw = r.w_plus - r.w_minus, jv = r.v_plus - r.v_minus;
        r.rh_mass = std::abs(r.s * jw + jv);
        r.rh_momentum = std::abs(r.s * jv + (law.sigma(r.w_plus) - law.sigma(r.w_minus)));
        table.jump_sum += g.w[e] - g.w[b];
        table.jumps.push_back(r);
        prev_end = e;
    }
    // Increments outside the cores.
    std::size_t cursor = 0;
    for (const auto& [b, e] : cores) {
        table.smooth_sum += g.w[b] - g.w[cursor];
        cursor = e;
    }
    table.smooth_sum += g.w[n - 1] - g.w[cursor];
    return table;
}

/// Index of the hyperbolic component containing w, or -1 if sigma_w(w) <= 0.
inline int hyperbolic_component(const std::vector<Interval>& regions, double w) {
    for (std::size_t k = 0; k < regions.size(); ++k)
        if (w >= regions[k].lo && w <= regions[k].hi) return static_cast<int>(k);
    return -1;
}

/// Classification against lambda = sign(s) sqrt(sigma_w): phase boundary if the
/// traces sit in different hyperbolic components, marginal within 10 eps of a
/// Lax equality, classical if lambda(w+) <= s <= lambda(w-), nonclassical otherwise.
inline WaveClass classify_wave(const JumpRecord& j, const StressLaw& law, double eps) {
    const double lo = std::min(j.w_minus, j.w_plus) - 1.0, hi = std::max(j.w_minus, j.w_plus) + 1.0;
    const auto regions = hyperbolic_region(law, {lo, hi});
    const int cm = hyperbolic_component(regions, j.w_minus), cp = hyperbolic_component(regions, j.w_plus);
    if (cm < 0 || cp < 0 || cm != cp) return WaveClass::phase_boundary;
    const double sg = j.s >= 0.0 ? 1.0 : -1.0;
    const double lm = sg * std::sqrt(law.deriv(j.w_minus));
    const double lp = sg * std::sqrt(law.deriv(j.w_plus));
    const double band = 10.0 * eps;
    if (std::abs(j.s - lm) <= band || std::abs(j.s - lp) <= band) return WaveClass::marginal;
    return lp <= j.s && j.s <= lm ? WaveClass::classical_lax : WaveClass::nonclassical;
}

inline void classify_all(JumpTable& t, const StressLaw& law, double eps) {
    for (auto& j : t.jumps) j.classification = classify_wave(j, law, eps);
}

/// L1 distance of two profiles on identical grids over |y| > r0.
inline double l1_distance(const ProfileGrid& a, const ProfileGrid& b, double r0, bool use_v = false) {
    require(a.size() == b.size(), "profiles must share a grid");
    const auto& fa = use_v ? a.v : a.w;
    const auto& fb = use_v ? b.v : b.w;
    double s = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        const double ym = 0.5 * (a.y[i] + a.y[i - 1]);
        if (std::abs(ym) <= r0 || a.y[i] - a.y[i - 1] > 1.5 * a.spacing()) continue;
        s += 0.5 * (a.y[i] - a.y[i - 1]) * (std::abs(fa[i] - fb[i]) + std::abs(fa[i - 1] - fb[i - 1]));
    }
    return s;
}

struct SweepResult {
    std::vector<double> eps;
    std::vector<SelfSimilarSolution> members;
    std::vector<double> distances;    ///< d_k between members k and k+1
    std::vector<double> ratios;       ///< d_k / d_{k+1}
    bool cauchy = false;              ///< every ratio >= cauchy_factor
    double max_tv_w = 0.0;
    std::vector<std::string> failures;
};

/// Solves each eps (descending) with delta = gamma eps^2 and measures the
/// Cauchy behaviour of the profiles away from |y| < r0. Members are solved on
/// up to `jobs` threads; results do not depend on the thread count.
inline SweepResult epsilon_sweep(const StressLaw& law, const SolverConfig& base, const RiemannData& d,
                                 const std::vector<double>& eps_list, double r0 = 0.1, double cauchy_factor = 1.5,
                                 int jobs = 1) {
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        require(eps_list[i] < eps_list[i - 1], "eps list must be strictly decreasing");
    require(jobs >= 1, "jobs must be positive");
    const std::size_t n = eps_list.size();
    std::vector<std::optional<SelfSimilarSolution>> solved(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next++) < n;) {
            SolverConfig c = base;
            c.eps = eps_list[k];
            try {
                solved[k] = solve_profile(law, c, d);
            } catch (const SolverError& err) {
                errors[k] = "eps=" + std::to_string(eps_list[k]) + ": " + std::string(err.name()) + ": " + err.what();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < std::min<int>(jobs, static_cast<int>(n)); ++t) pool.emplace_back(worker);
        worker();
    }
    SweepResult out;
    for (std::size_t k = 0; k < n; ++k) {
        if (solved[k]) {
            out.members.push_back(std::move(*solved[k]));
            out.eps.push_back(eps_list[k]);
        } else {
            out.failures.push_back(errors[k]);
        }
    }
    for (const auto& m : out.members) out.max_tv_w = std::max(out.max_tv_w, m.tv_w);
    for (std::size_t k = 0; k + 1 < out.members.size(); ++k)
        out.distances.push_back(l1_distance(out.members[k].grid, out.members[k + 1].grid, r0));
    out.cauchy = out.failures.empty() && out.distances.size() >= 2;
    for (std::size_t k = 0; k + 1 < out.distances.size(); ++k) {
        const double r = out.distances[k + 1] > 0.0 ? out.distances[k] / out.distances[k + 1]
                                                    : std::numeric_limits<double>::infinity();
        out.ratios.push_back(r);
        if (!(r >= cauchy_factor)) out.cauchy = false;
    }
    if (!out.distances.empty() && std::all_of(out.distances.begin(), out.distances.end(), [](double x) { return x == 0.0; }))
        out.cauchy = true;
    return out;
}

struct KineticRow {
    double gamma = 0.0;
    double delta0 = 0.0;
    double w_star = 0.0;
    double v_star = 0.0;
    std::vector<JumpRecord> jumps;
    std::string failure;
};

/// Excised capillary solves with delta = delta0(gamma) for each gamma; the
/// table is a record of the detected waves, not a check.
inline std::vector<KineticRow> kinetic_sample(const StressLaw& law, const SolverConfig& base, const RiemannData& d,
                                              const std::vector<double>& gammas) {
    std::vector<KineticRow> rows;
    for (double gm : gammas) {
        KineticRow row;
        row.gamma = gm;
        row.delta0 = delta_cutoff(law.c_lower(), gm);
        SolverConfig c = base;
        c.gamma = gm;
        try {
            const SelfSimilarSolution s = solve_excised(law, c, d, std::max(row.delta0, 1e-3));
            row.w_star = s.w_star;
            row.v_star = s.v_star;
            JumpTable t = detect_jumps(s, law, c.eps);
            classify_all(t, law, c.eps);
            row.jumps = t.jumps;
        } catch (const SolverError& err) {
            row.failure = err.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct ConcentrationReport {
    std::vector<double> delta;
    std::vector<double> sup_yw;
    std::vector<double> weighted_tv;
    std::vector<double> tv_w;
    std::vector<double> tv_v;
    std::vector<int> oscillations;   ///< sign changes of w' with |y| < 1
    bool sup_yw_bounded = true;      ///< consecutive ratios <= 2
    bool weighted_tv_bounded = true;
    bool tv_w_growing = false;       ///< reported, not asserted
};

inline int near_axis_oscillations(const SelfSimilarSolution& s, double radius = 1.0) {
    const auto& g = s.grid;
    int count = 0, last = 0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double ym = 0.5 * (g.y[i] + g.y[i + 1]);
        if (std::abs(ym) >= radius || g.y[i + 1] - g.y[i] > 1.5 * g.spacing()) continue;
        const double d = g.w[i + 1] - g.w[i];
        const int sg = d > 1e-14 ? 1 : d < -1e-14 ? -1 : 0;
        if (sg != 0) {
            if (last != 0 && sg != last) ++count;
            last = sg;
        }
    }
    return count;
}

inline ConcentrationReport concentration_diagnostics(const std::vector<SelfSimilarSolution>& seq) {
    ConcentrationReport rep;
    for (const auto& s : seq) {
        rep.delta.push_back(s.grid.delta);
        rep.sup_yw.push_back(s.sup_yw);
        rep.weighted_tv.push_back(s.weighted_tv_w);
        rep.tv_w.push_back(s.tv_w);
        rep.tv_v.push_back(s.tv_v);
        rep.oscillations.push_back(near_axis_oscillations(s));
    }
    auto bounded = [](const std::vector<double>& v) {
        for (std::size_t k = 1; k < v.size(); ++k) {
            if (v[k - 1] == 0.0 && v[k] == 0.0) continue;
            if (v[k - 1] == 0.0 || v[k] / v[k - 1] > 2.0) return false;
        }
        return true;
    };
    rep.sup_yw_bounded = bounded(rep.sup_yw);
    rep.weighted_tv_bounded = bounded(rep.weighted_tv);
    rep.tv_w_growing = rep.tv_w.size() >= 2 && rep.tv_w.back() > rep.tv_w.front() * (1.0 + 1e-6);
    return rep;
}

/// Constant of the v-variation bound: 2 + sup_{1 <= |y| <= L} ((sigma_w - eps)^+)^(1/2).
inline double variation_constant(const SelfSimilarSolution& s, const StressLaw& law, double eps) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        if (std::abs(s.grid.y[i]) >= 1.0) m = std::max(m, std::sqrt(std::max(law.deriv(s.grid.w[i]) - eps, 0.0)));
    return 2.0 + m;
}

} // namespace selfsim
