#pragma once

#include "selfsim/errors.hpp"

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace selfsim {

enum class LawKind { linear, hardening, cubic, custom };

inline std::string to_string(LawKind kind) {
    switch (kind) {
    case LawKind::linear: return "linear";
    case LawKind::hardening: return "hardening";
    case LawKind::cubic: return "cubic";
    case LawKind::custom: return "custom";
    }
    return "custom";
}

/// |sigma_w(w)| <= c1 |w|^(2 - eta) for |w| > 1.
struct GrowthBound {
    double c1 = 3.0;
    double eta = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Constitutive stress law sigma(w) of the p-system together with the regime
/// constants the solvers need. Immutable once built.
class StressLaw {
public:
    using Fn = std::function<double(double)>;

    /// sigma = c0^2 w
    static StressLaw linear(double c0) {
        require(c0 > 0.0, "linear law needs c0 > 0");
        const double c2 = c0 * c0;
        StressLaw law(LawKind::linear, [c2](double w) { return c2 * w; },
                      [c2](double) { return c2; });
        law.params_ = {c0};
        law.c0_sq_ = c2;
        law.growth_ = GrowthBound{c2, 1.0};
        return law;
    }

    /// sigma = w + w^3, uniformly hyperbolic with c0 = 1.
    static StressLaw hardening() {
        StressLaw law(LawKind::hardening, [](double w) { return w + w * w * w; },
                      [](double w) { return 1.0 + 3.0 * w * w; });
        law.c0_sq_ = 1.0;
        law.growth_ = GrowthBound{4.0, 0.0};
        return law;
    }

    /// sigma = w^3 - w (van der Waals type); elliptic for |w| < 1/sqrt(3).
    static StressLaw cubic() {
        StressLaw law(LawKind::cubic, [](double w) { return w * w * w - w; },
                      [](double w) { return 3.0 * w * w - 1.0; });
        law.c_lower_ = 1.0;
        law.hyperbolic_threshold_ = 1.0;
        law.c0_sq_ = 2.0; // inf of sigma_w over |w| >= 1
        law.growth_ = GrowthBound{3.0, 0.0};
        return law;
    }

    /// Tabulated (w, sigma) pairs joined by a monotone cubic (PCHIP) interpolant;
    /// sigma_w is the interpolant's derivative.
    static StressLaw tabulated(std::vector<double> w, std::vector<double> sigma) {
        require(w.size() == sigma.size() && w.size() >= 4, "tabulated law needs >= 4 (w, sigma) pairs");
        for (std::size_t i = 1; i < w.size(); ++i)
            require(w[i] > w[i - 1], "tabulated law: w column must be strictly increasing");
        const double lo = w.front();
        const double hi = w.back();
        auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
            std::move(w), std::move(sigma));
        auto clamp = [lo, hi](double x) { return std::clamp(x, lo, hi); };
        StressLaw law(LawKind::custom, [spline, clamp](double x) { return (*spline)(clamp(x)); },
                      [spline, clamp](double x) { return spline->prime(clamp(x)); });
        law.name_ = "tabulated";
        law.finish_custom(lo, hi);
        return law;
    }

    /// Closed-form custom law; `range` is the working interval used to derive
    /// c0_sq and c_lower by sampling.
    static StressLaw custom(std::string name, Fn sigma, Fn dsigma, Interval range = {-3.0, 3.0}) {
        StressLaw law(LawKind::custom, std::move(sigma), std::move(dsigma));
        law.name_ = std::move(name);
        law.finish_custom(range.lo, range.hi);
        return law;
    }

    double sigma(double w) const { return sigma_(w); }
    double deriv(double w) const { return dsigma_(w); }
    double operator()(double w) const { return sigma_(w); }

    LawKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const std::vector<double>& params() const { return params_; }
    /// Infimum of sigma_w over the hyperbolic working range (|w| >= M for phase laws).
    double c0_sq() const { return c0_sq_; }
    double c0() const { return std::sqrt(std::max(c0_sq_, 0.0)); }
    /// c >= 0 with sigma_w >= -c everywhere.
    double c_lower() const { return c_lower_; }
    /// M with inf_{|w| >= M} sigma_w >= c0_sq; 0 for uniformly hyperbolic laws.
    double hyperbolic_threshold() const { return hyperbolic_threshold_; }
    const std::optional<GrowthBound>& growth() const { return growth_; }
    bool uniformly_hyperbolic() const { return hyperbolic_threshold_ == 0.0 && c0_sq_ > 0.0; }

    StressLaw with_growth(GrowthBound g) const {
        StressLaw copy = *this;
        copy.growth_ = g;
        return copy;
    }

private:
    StressLaw(LawKind kind, Fn sigma, Fn dsigma)
        : kind_(kind), name_(to_string(kind)), sigma_(std::move(sigma)), dsigma_(std::move(dsigma)) {}

    void finish_custom(double lo, double hi) {
        constexpr int samples = 10001;
        double mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < samples; ++i) {
            const double w = lo + (hi - lo) * i / (samples - 1);
            mn = std::min(mn, dsigma_(w));
        }
        c0_sq_ = mn > 0.0 ? mn : 0.0;
        c_lower_ = mn < 0.0 ? -mn : 0.0;
    }

    LawKind kind_;
    std::string name_;
    Fn sigma_;
    Fn dsigma_;
    std::vector<double> params_;
    double c0_sq_ = 0.0;
    double c_lower_ = 0.0;
    double hyperbolic_threshold_ = 0.0;
    std::optional<GrowthBound> growth_;
};

/// Maximal sub-intervals of [lo, hi] on which sigma_w > 0. Sampled on 10,001
/// points, interior endpoints refined by bisection. Empty when the whole range
/// is elliptic or degenerate.
inline std::vector<Interval> hyperbolic_region(const StressLaw& law, Interval range) {
    require(std::isfinite(range.lo) && std::isfinite(range.hi) && range.hi > range.lo,
            "hyperbolic_region needs a finite, non-empty range");
    constexpr int samples = 10001;
    auto at = [&](int i) { return range.lo + (range.hi - range.lo) * i / (samples - 1); };
    auto positive = [&](double w) { return law.deriv(w) > 0.0; };

    // Boundary between a positive and a non-positive sample.
    auto refine = [&](double a, double b) {
        const bool pa = positive(a);
        auto f = [&](double w) { return positive(w) == pa ? -1.0 : 1.0; };
        auto r = boost::math::tools::bisect(f, a, b, boost::math::tools::eps_tolerance<double>(52));
        return 0.5 * (r.first + r.second);
    };

    std::vector<Interval> out;
    bool inside = positive(at(0));
    double start = range.lo;
    for (int i = 1; i < samples; ++i) {
        const bool p = positive(at(i));
        if (p == inside) continue;
        const double edge = refine(at(i - 1), at(i));
        if (inside) out.push_back({start, edge});
        else start = edge;
        inside = p;
    }
    if (inside) out.push_back({start, range.hi});
    return out;
}

struct GrowthReport {
    bool satisfied = true;
    double worst_ratio = 0.0;
    double worst_w = 0.0;
};

/// Samples |sigma_w(w)| / |w|^(2 - eta) on 1 < |w| <= w_max.
inline GrowthReport growth_check(const StressLaw& law, double w_max, std::optional<GrowthBound> bound = {}) {
    const GrowthBound g = bound ? *bound : law.growth().value_or(GrowthBound{});
    GrowthReport rep;
    if (w_max <= 1.0) return rep;
    constexpr int samples = 10000;
    for (int side = -1; side <= 1; side += 2) {
        for (int i = 1; i <= samples; ++i) {
            const double a = 1.0 + (w_max - 1.0) * i / samples;
            const double w = side * a;
            const double ratio = std::abs(law.deriv(w)) / std::pow(a, 2.0 - g.eta);
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_w = w;
            }
        }
    }
    rep.satisfied = rep.worst_ratio <= g.c1;
    return rep;
}

} // namespace selfsim
