#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace selfsim::quad {

/// Composite trapezoid rule on arbitrary nodes.
inline double trapezoid(std::span<const double> x, std::span<const double> f) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return s;
}

/// Running trapezoid integral from x[0]; out[0] = 0.
inline std::vector<double> cumulative(std::span<const double> x, std::span<const double> f) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return out;
}

/// Trapezoid of f * x (first moment).
inline double first_moment(std::span<const double> x, std::span<const double> f) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (x[i] - x[i - 1]) * (x[i] * f[i] + x[i - 1] * f[i - 1]);
    return s;
}

/// Trapezoid on every other node; pairs with the full-grid value to give a
/// Richardson estimate of the quadrature error, |I_h - I_2h| / 3.
inline double trapezoid_coarse(std::span<const double> x, std::span<const double> f) {
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < x.size(); i += 2) s += 0.5 * (x[i + 2] - x[i]) * (f[i + 2] + f[i]);
    if (i + 1 < x.size()) s += 0.5 * (x[i + 1] - x[i]) * (f[i + 1] + f[i]);
    return s;
}

/// log(sum_k exp(a_k) * weight_k) with max-shift; weights non-negative.
inline double log_trapezoid_exp(std::span<const double> x, std::span<const double> log_f) {
    const double m = *std::max_element(log_f.begin(), log_f.end());
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (x[i] - x[i - 1]) * (std::exp(log_f[i] - m) + std::exp(log_f[i - 1] - m));
    return m + std::log(s);
}

} // namespace selfsim::quad
