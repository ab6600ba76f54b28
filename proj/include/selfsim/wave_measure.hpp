#pragma once

#include "selfsim/constitutive.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/grid.hpp"
#include "selfsim/quadrature.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace selfsim {

/// Squared characteristic speed along a half-axis, in outward coordinates
/// x = |y|. `at` interpolates between nodes (used for root refinement).
struct SpeedField {
    std::vector<double> x;
    std::vector<double> s;
    std::function<double(double)> at;

    double min() const { return *std::min_element(s.begin(), s.end()); }
    double max() const { return *std::max_element(s.begin(), s.end()); }
};

namespace detail {

inline std::size_t cell_of(std::span<const double> x, double q) {
    auto it = std::upper_bound(x.begin(), x.end(), q);
    std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    return std::min(k, x.size() - 2);
}

inline double lerp_at(std::span<const double> x, std::span<const double> f, double q) {
    const std::size_t k = cell_of(x, q);
    const double t = (q - x[k]) / (x[k + 1] - x[k]);
    return f[k] + t * (f[k + 1] - f[k]);
}

} // namespace detail

/// sigma_w(w(y)) along a half-axis, interpolating w linearly between nodes.
inline SpeedField speed_field(const StressLaw& law, const ProfileGrid& g, Side side) {
    const HalfAxis h = half_axis(g, side);
    SpeedField f;
    f.x = h.x;
    auto w = gather(h, g.w);
    f.s.resize(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) f.s[k] = law.deriv(w[k]);
    f.at = [law, x = h.x, w = std::move(w)](double q) { return law.deriv(detail::lerp_at(x, w, q)); };
    return f;
}

/// Speed field from nodal values only (piecewise linear in s).
inline SpeedField speed_field(std::vector<double> x, std::vector<double> s) {
    SpeedField f;
    f.x = std::move(x);
    f.s = std::move(s);
    f.at = [x = f.x, s = f.s](double q) { return detail::lerp_at(x, s, q); };
    return f;
}

/// Normalized non-negative density on one half-axis. All nodal arrays are in
/// outward order (x ascending away from the axis).
struct WaveMeasure {
    Side side = Side::plus;
    std::vector<std::size_t> index;  ///< grid indices of the support nodes
    std::vector<double> x;           ///< |y| at the support nodes
    std::vector<double> x_eval;      ///< where the exponent was evaluated (origin node offset to h/2)
    std::vector<double> density;
    std::vector<double> exponent;    ///< un-normalized log-density, without the amplitude
    std::vector<double> amplitude_prefactor;
    std::vector<double> log_density; ///< log of density, finite even where density underflows
    std::vector<double> tail;        ///< integral of density from x[k] to L; tail[0] = 1
    double rho = 0.0;                ///< signed concentration point
    std::vector<double> rho_candidates;
    bool degenerate = false;         ///< concentration point sits on the inner boundary
    double first_moment = 0.0;       ///< integral of |y| density
    double moment_error = 0.0;       ///< half-grid Richardson estimate for first_moment
    double s_min = 0.0, s_max = 0.0; ///< range of the speed field on this half-axis
    double eps = 0.0;
    double gamma = 0.0;
    double k_constant = 0.0;         ///< WKB correction constant (capillary only)
    double phi_error_bound = 0.0;    ///< eps sqrt(gamma) k

    std::size_t size() const { return x.size(); }
    double signed_y(std::size_t k) const { return side == Side::plus ? x[k] : -x[k]; }
    /// Integral of y * density over the half-axis (negative on the minus side).
    double signed_moment() const { return side == Side::plus ? first_moment : -first_moment; }
    double mass() const { return quad::trapezoid(x, density); }
};

namespace detail {

// Outward antiderivative of a(x) = x - (s - eps)/x by product integration:
// the x-part exactly, the 1/x part with s linear per cell.
inline std::vector<double> viscous_antiderivative(std::span<const double> xe, std::span<const double> s,
                                                  double eps) {
    std::vector<double> q(xe.size(), 0.0);
    for (std::size_t k = 1; k < xe.size(); ++k) {
        const double x0 = xe[k - 1], x1 = xe[k];
        const double g0 = s[k - 1] - eps, g1 = s[k] - eps;
        const double m = (g1 - g0) / (x1 - x0);
        const double ig = (g0 - m * x0) * std::log(x1 / x0) + m * (x1 - x0);
        q[k] = q[k - 1] + 0.5 * (x1 * x1 - x0 * x0) - ig;
    }
    return q;
}

inline std::vector<double> effective_x(std::span<const double> x) {
    std::vector<double> xe(x.begin(), x.end());
    if (xe.size() > 1 && xe[0] == 0.0) xe[0] = 0.5 * xe[1];
    return xe;
}

// Bisection for the concentration point around node k, on the residual
// x^2 - s(x) + shift. Returns the node itself when no bracketing cell exists.
inline double refine_root(const SpeedField& f, std::span<const double> xe, std::size_t k, double shift) {
    auto r = [&](double q) { return q * q - f.at(q) + shift; };
    auto try_cell = [&](std::size_t a, std::size_t b, double& out) {
        const double ra = r(xe[a]), rb = r(xe[b]);
        if (ra == 0.0) { out = xe[a]; return true; }
        if (rb == 0.0) { out = xe[b]; return true; }
        if ((ra < 0.0) == (rb < 0.0)) return false;
        auto tol = [](double lo, double hi) { return hi - lo <= 1e-14 * std::max(1.0, std::abs(hi)); };
        auto br = boost::math::tools::bisect(r, xe[a], xe[b], tol);
        out = 0.5 * (br.first + br.second);
        return true;
    };
    double root = xe[k];
    if (k + 1 < xe.size() && try_cell(k, k + 1, root)) return root;
    if (k > 0 && try_cell(k - 1, k, root)) return root;
    return xe[k];
}

inline void finish_measure(WaveMeasure& m, std::size_t peak, double shift, const SpeedField& f) {
    const std::size_t n = m.x.size();
    m.log_density.resize(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        m.log_density[k] = m.exponent[k] + std::log(m.amplitude_prefactor[k]);
        top = std::max(top, m.log_density[k]);
    }
    std::vector<double> raw(n);
    for (std::size_t k = 0; k < n; ++k) raw[k] = std::exp(m.log_density[k] - top);
    const double z = quad::trapezoid(m.x, raw);
    require(z > 0.0 && std::isfinite(z), "wave measure normalizer is not positive");
    m.density.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        m.density[k] = raw[k] / z;
        m.log_density[k] -= top + std::log(z);
    }
    // Tail masses, rescaled so that tail[0] is exactly one.
    m.tail.assign(n, 0.0);
    for (std::size_t k = n - 1; k-- > 0;)
        m.tail[k] = m.tail[k + 1] + 0.5 * (m.x[k + 1] - m.x[k]) * (m.density[k] + m.density[k + 1]);
    const double t0 = m.tail[0];
    for (auto& t : m.tail) t /= t0;
    m.tail[0] = 1.0;

    m.first_moment = quad::first_moment(m.x, m.density);
    std::vector<double> xd(n);
    for (std::size_t k = 0; k < n; ++k) xd[k] = m.x[k] * m.density[k];
    m.moment_error = std::abs(m.first_moment - quad::trapezoid_coarse(m.x, xd)) / 3.0;
    m.s_min = f.min();
    m.s_max = f.max();

    m.degenerate = peak == 0 && (m.x.size() < 2 || m.exponent[1] < m.exponent[0]);
    const double mag = m.degenerate ? m.x[0] : refine_root(f, m.x_eval, peak, shift);
    m.rho = m.side == Side::plus ? mag : -mag;

    // Local maxima of the exponent within one unit of the global maximum.
    const double emax = m.exponent[peak];
    for (std::size_t k = 0; k < n; ++k) {
        const bool left = k == 0 || m.exponent[k] >= m.exponent[k - 1];
        const bool right = k + 1 == n || m.exponent[k] >= m.exponent[k + 1];
        if (left && right && emax - m.exponent[k] <= 1.0) m.rho_candidates.push_back(m.signed_y(k));
    }
}

// First node holding the maximum (ties go to the smallest |y|).
inline std::size_t argmax_first(std::span<const double> e) {
    return static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
}

} // namespace detail

/// Viscous measure on a half-axis from its speed field: density proportional
/// to exp(-P/eps), P the antiderivative of a(y) = y - (s - eps)/y.
inline WaveMeasure viscous_measure(const HalfAxis& h, const SpeedField& f, double eps) {
    require(eps > 0.0, "eps must be positive");
    require(h.size() >= 3 && f.s.size() == h.size(), "speed field does not match half-axis");
    WaveMeasure m;
    m.side = h.side;
    m.index = h.index;
    m.x = h.x;
    m.eps = eps;
    m.x_eval = detail::effective_x(h.x);
    const auto q = detail::viscous_antiderivative(m.x_eval, f.s, eps);
    m.exponent.resize(q.size());
    const double qmin = *std::min_element(q.begin(), q.end());
    for (std::size_t k = 0; k < q.size(); ++k) m.exponent[k] = -(q[k] - qmin) / eps;
    m.amplitude_prefactor.assign(q.size(), 1.0);
    detail::finish_measure(m, detail::argmax_first(m.exponent), eps, f);
    return m;
}

/// mu = s + x^2 (1/(4 gamma) - 1) - eps/2 at every node.
inline std::vector<double> wkb_mu(const SpeedField& f, double eps, double gamma) {
    require(gamma > 0.0, "WKB branch needs gamma > 0");
    std::vector<double> mu(f.x.size());
    for (std::size_t k = 0; k < mu.size(); ++k)
        mu[k] = f.s[k] + f.x[k] * f.x[k] * (0.25 / gamma - 1.0) - 0.5 * eps;
    return mu;
}

struct MuField {
    std::vector<double> y;
    std::vector<double> mu;
    std::vector<std::size_t> nonpositive; ///< grid indices with mu <= 0
    bool positive() const { return nonpositive.empty(); }
};

/// mu on every node of the grid.
inline MuField wkb_mu(const StressLaw& law, const ProfileGrid& g, double eps, double gamma) {
    require(gamma > 0.0, "WKB branch needs gamma > 0");
    MuField out;
    out.y = g.y;
    out.mu.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        out.mu[i] = law.deriv(g.w[i]) + g.y[i] * g.y[i] * (0.25 / gamma - 1.0) - 0.5 * eps;
        if (!(out.mu[i] > 0.0)) out.nonpositive.push_back(i);
    }
    return out;
}

namespace detail {

inline void require_mu_positive(std::span<const double> mu, std::span<const double> x) {
    std::string bad;
    int count = 0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (mu[k] > 0.0) continue;
        if (count++ < 8) bad += (bad.empty() ? "" : ", ") + std::to_string(x[k]);
    }
    if (count > 0)
        throw SolverError(ErrorCode::mu_nonpositive,
                          std::to_string(count) + " node(s) with mu <= 0 at |y| = " + bad + (count > 8 ? ", ..." : ""));
}

// p' = -x/(2 gamma) + sqrt(mu/gamma), written without cancellation.
inline double wkb_slope(double x, double s, double eps, double gamma) {
    const double d = s - 0.5 * eps - x * x;
    return 2.0 * d / (std::sqrt(x * x + 4.0 * gamma * d) + x);
}

// Centered first and second differences on a non-uniform grid.
inline void differences(std::span<const double> x, std::span<const double> f, std::vector<double>& d1,
                        std::vector<double>& d2) {
    const std::size_t n = x.size();
    d1.assign(n, 0.0);
    d2.assign(n, 0.0);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double hl = x[k] - x[k - 1], hr = x[k + 1] - x[k];
        d1[k] = (f[k + 1] * hl * hl - f[k - 1] * hr * hr + f[k] * (hr * hr - hl * hl)) / (hl * hr * (hl + hr));
        d2[k] = 2.0 * (f[k + 1] * hl + f[k - 1] * hr - f[k] * (hl + hr)) / (hl * hr * (hl + hr));
    }
    d1[0] = (f[1] - f[0]) / (x[1] - x[0]);
    d1[n - 1] = (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2]);
    d2[0] = d2[1];
    d2[n - 1] = d2[n - 2];
}

} // namespace detail

/// p(y, rho) along a half-axis (outward), shifted so that p(rho) = 0.
struct WkbExponent {
    std::vector<double> p;
    std::vector<double> mu;
    double rho = 0.0; ///< unsigned
    std::size_t peak = 0;
};

inline WkbExponent wkb_exponent(const SpeedField& f, double eps, double gamma) {
    WkbExponent out;
    out.mu = wkb_mu(f, eps, gamma);
    detail::require_mu_positive(out.mu, f.x);
    const std::size_t n = f.x.size();
    std::vector<double> slope(n);
    for (std::size_t k = 0; k < n; ++k) slope[k] = detail::wkb_slope(f.x[k], f.s[k], eps, gamma);
    out.p = quad::cumulative(f.x, slope);
    out.peak = detail::argmax_first(out.p);
    out.rho = detail::refine_root(f, f.x, out.peak, 0.5 * eps);
    const std::size_t k = out.peak;
    const double p_rho = out.p[k] + 0.5 * (out.rho - f.x[k]) * slope[k];
    for (auto& v : out.p) v -= p_rho;
    return out;
}

/// Leading-order WKB measure: density proportional to (4 gamma mu)^(-1/4) e^(p/eps).
inline WaveMeasure capillary_measure(const HalfAxis& h, const SpeedField& f, double eps, double gamma) {
    require(eps > 0.0, "eps must be positive");
    require(h.size() >= 3 && f.s.size() == h.size(), "speed field does not match half-axis");
    const WkbExponent e = wkb_exponent(f, eps, gamma);
    WaveMeasure m;
    m.side = h.side;
    m.index = h.index;
    m.x = h.x;
    m.x_eval = h.x;
    m.eps = eps;
    m.gamma = gamma;
    const std::size_t n = h.size();
    m.exponent.resize(n);
    m.amplitude_prefactor.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        m.exponent[k] = e.p[k] / eps;
        m.amplitude_prefactor[k] = std::pow(4.0 * gamma * e.mu[k], -0.25);
    }
    detail::finish_measure(m, e.peak, 0.5 * eps, f);

    std::vector<double> d1, d2;
    detail::differences(m.x, e.mu, d1, d2);
    std::vector<double> k1(n), k2(n);
    for (std::size_t k = 0; k < n; ++k) {
        k1[k] = std::pow(e.mu[k], -1.25) * d1[k] * d1[k];
        k2[k] = std::pow(e.mu[k], -1.5) * std::abs(d2[k]);
    }
    m.k_constant = quad::trapezoid(m.x, k1) + quad::trapezoid(m.x, k2);
    m.phi_error_bound = eps * std::sqrt(gamma) * m.k_constant;
    return m;
}

/// Antiderivative of a(y) = y - (sigma_w(w) - eps)/y on every grid node:
/// based at -L on the minus half-axis and at the first node (evaluated at h/2
/// when that node is the origin) on the plus half-axis.
inline std::vector<double> viscous_exponent(const StressLaw& law, const ProfileGrid& g, double eps) {
    require(eps > 0.0, "eps must be positive");
    std::vector<double> p(g.size(), 0.0);
    for (Side side : {Side::minus, Side::plus}) {
        if (side == Side::minus && !g.has_minus()) continue;
        const HalfAxis h = half_axis(g, side);
        const SpeedField f = speed_field(law, g, side);
        const auto q = detail::viscous_antiderivative(detail::effective_x(h.x), f.s, eps);
        // In outward coordinates the minus-side antiderivative is Q(x) - Q(L).
        const double base = side == Side::minus ? q.back() : 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) {
            if (side == Side::minus && g.shared_origin() && h.index[k] == g.first_plus) continue;
            p[h.index[k]] = q[k] - base;
        }
    }
    return p;
}

struct RhoResult {
    double rho = 0.0;
    bool degenerate = false;
    std::vector<double> candidates;
};

/// Global minimizer of P on one half-axis (signed), refined by bisection.
inline RhoResult locate_rho(const StressLaw& law, const ProfileGrid& g, double eps, Side side) {
    const HalfAxis h = half_axis(g, side);
    const WaveMeasure m = viscous_measure(h, speed_field(law, g, side), eps);
    return {m.rho, m.degenerate, m.rho_candidates};
}

inline WaveMeasure build_phi_viscous(const StressLaw& law, const ProfileGrid& g, double eps, Side side) {
    return viscous_measure(half_axis(g, side), speed_field(law, g, side), eps);
}

inline WaveMeasure build_phi_capillary(const StressLaw& law, const ProfileGrid& g, double eps, double gamma,
                                       Side side) {
    return capillary_measure(half_axis(g, side), speed_field(law, g, side), eps, gamma);
}

/// gamma == 0 selects the viscous branch.
inline WaveMeasure build_phi(const StressLaw& law, const ProfileGrid& g, double eps, double gamma, Side side) {
    return gamma > 0.0 ? build_phi_capillary(law, g, eps, gamma, side) : build_phi_viscous(law, g, eps, side);
}

struct EnvelopeRegion {
    std::string name;
    double lo = 0.0, hi = 0.0;  ///< |y| range
    double fitted_c1 = 0.0;     ///< max density * eps / shape over the region
    double worst_x = 0.0;
    std::size_t nodes = 0;
};

struct EnvelopeReport {
    bool applicable = true;     ///< false when lambda_m is not real (elliptic values on the half-axis)
    bool pass = false;
    double fitted_c1 = 0.0;
    double lambda_m = 0.0, lambda_M = 0.0;
    std::vector<EnvelopeRegion> regions;
    std::string note;
};

/// Fits C1 in density <= (C1/eps) * shape(|y|) region by region, using the
/// piecewise envelope of the matching branch. Passes iff C1 <= c1_limit.
inline EnvelopeReport envelope_check(const WaveMeasure& m, std::optional<double> s_min = {},
                                     std::optional<double> s_max = {}, double c1_limit = 100.0) {
    EnvelopeReport rep;
    const double eps = m.eps;
    const double gamma = m.gamma;
    const double shift = gamma > 0.0 ? 0.5 * eps : eps;
    const double smn = s_min.value_or(m.s_min) - shift;
    const double smx = s_max.value_or(m.s_max) - shift;
    if (!(smn > 0.0)) {
        rep.applicable = false;
        rep.note = "speed field drops below the regularization shift; no envelope near the axis";
        rep.fitted_c1 = std::numeric_limits<double>::infinity();
        return rep;
    }
    const double lm = std::sqrt(smn), lM = std::sqrt(smx);
    rep.lambda_m = lm;
    rep.lambda_M = lM;

    struct Piece {
        std::string name;
        double lo, hi;
        std::function<double(double)> log_shape;
    };
    std::vector<Piece> pieces;
    const double inf = std::numeric_limits<double>::infinity();
    if (gamma > 0.0) {
        const double sg = std::sqrt(gamma);
        const double c_in = 2.0 * lm * lm * (1.0 - gamma) / (3.0 * sg * lM);
        const double c_mid = 0.5 * std::min(1.0, lm / (sg * lM));
        const double c_out = 0.5 * lM;
        pieces.push_back({"inner", 0.0, sg * lm, [=](double y) { return -c_in * std::abs(y - sg * lm) / eps; }});
        pieces.push_back({"rise", sg * lm, lm, [=](double y) { return -c_mid * (y - lm) * (y - lm) / eps; }});
        pieces.push_back({"plateau", lm, lM, [](double) { return 0.0; }});
        pieces.push_back({"outer", lM, inf, [=](double y) { return -c_out * (y - lM) * (y - lM) / (eps * y); }});
    } else {
        const double pw = 3.0 * lm * lm / (4.0 * eps);
        pieces.push_back({"inner", 0.0, 0.25 * lm, [=](double y) { return pw * std::log(2.0 * y / lm); }});
        pieces.push_back({"rise", 0.25 * lm, lm, [=](double y) { return -(y - lm) * (y - lm) / (2.0 * eps); }});
        pieces.push_back({"plateau", lm, lM, [](double) { return 0.0; }});
        pieces.push_back({"outer", lM, inf, [=](double y) { return -(y - lM) * (y - lM) / (2.0 * eps); }});
    }

    double worst = -inf;
    for (const auto& pc : pieces) {
        EnvelopeRegion r{pc.name, pc.lo, std::min(pc.hi, m.x.back()), 0.0, 0.0, 0};
        double best = -inf;
        for (std::size_t k = 0; k < m.size(); ++k) {
            const double xv = m.x[k];
            const bool in = pc.name == "plateau" ? (xv >= pc.lo && xv <= pc.hi) : (xv >= pc.lo && xv < pc.hi);
            if (!in) continue;
            ++r.nodes;
            const double ls = pc.log_shape(m.x_eval[k]);
            const double v = m.log_density[k] + std::log(eps) - ls;
            if (v > best) {
                best = v;
                r.worst_x = xv;
            }
        }
        r.fitted_c1 = r.nodes ? std::exp(best) : 0.0;
        worst = std::max(worst, best);
        rep.regions.push_back(r);
    }
    rep.fitted_c1 = std::exp(worst);
    rep.pass = rep.fitted_c1 <= c1_limit;
    return rep;
}

} // namespace selfsim
