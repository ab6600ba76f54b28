#pragma once

#include "selfsim/errors.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace selfsim {

enum class Side { minus, plus };

inline const char* to_string(Side s) { return s == Side::minus ? "minus" : "plus"; }

/// Discretized y-axis on [-L, L] (optionally with |y| < delta removed, or a
/// half line [0, L]) carrying nodal w and v.
struct ProfileGrid {
    double L = 0.0;
    double delta = 0.0;
    std::vector<double> y;
    std::vector<double> w;
    std::vector<double> v;
    std::size_t first_plus = 0;              ///< first node of the plus half-axis
    std::optional<std::size_t> last_minus;   ///< last node of the minus half-axis, if any

    std::size_t size() const { return y.size(); }
    bool has_minus() const { return last_minus.has_value(); }
    /// Full line through the origin: node 0 is shared by both half-axes.
    bool shared_origin() const { return has_minus() && *last_minus == first_plus; }
    double spacing() const { return y.size() > 1 ? y[first_plus + 1] - y[first_plus] : 0.0; }

    /// [begin, end) range of grid indices belonging to `side`.
    std::pair<std::size_t, std::size_t> range(Side side) const {
        if (side == Side::plus) return {first_plus, y.size()};
        require(has_minus(), "grid has no minus half-axis");
        return {0, *last_minus + 1};
    }
};

/// Uniform grid. delta == 0: `n_nodes` (rounded up to odd) nodes on [-L, L]
/// with 0 a node. delta > 0: (n_nodes + 1) / 2 nodes on each of [-L, -delta]
/// and [delta, L]. The minus half is the exact mirror of the plus half.
inline ProfileGrid make_grid(double L, std::size_t n_nodes, double delta = 0.0) {
    require(L > 0.0 && std::isfinite(L), "grid half-width L must be positive");
    require(delta >= 0.0 && delta < L, "excision delta must lie in [0, L)");
    require(n_nodes >= 5, "grid needs at least 5 nodes");
    ProfileGrid g;
    g.L = L;
    g.delta = delta;
    const std::size_t m = (n_nodes + 1) / 2; // nodes per half-axis
    std::vector<double> half(m);
    for (std::size_t k = 0; k < m; ++k)
        half[k] = delta + (L - delta) * static_cast<double>(k) / static_cast<double>(m - 1);
    half.back() = L;
    if (delta == 0.0) {
        g.y.resize(2 * m - 1);
        for (std::size_t k = 0; k < m; ++k) {
            g.y[m - 1 + k] = half[k];
            g.y[m - 1 - k] = -half[k];
        }
        g.y[m - 1] = 0.0;
        g.first_plus = m - 1;
        g.last_minus = m - 1;
    } else {
        g.y.resize(2 * m);
        for (std::size_t k = 0; k < m; ++k) {
            g.y[m + k] = half[k];
            g.y[m - 1 - k] = -half[k];
        }
        g.first_plus = m;
        g.last_minus = m - 1;
    }
    g.w.assign(g.y.size(), 0.0);
    g.v.assign(g.y.size(), 0.0);
    return g;
}

/// Uniform grid on [0, L] for the boundary problem.
inline ProfileGrid make_half_line_grid(double L, std::size_t n_nodes) {
    require(L > 0.0 && n_nodes >= 5, "half-line grid needs L > 0 and >= 5 nodes");
    ProfileGrid g;
    g.L = L;
    g.y.resize(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k)
        g.y[k] = L * static_cast<double>(k) / static_cast<double>(n_nodes - 1);
    g.y.back() = L;
    g.first_plus = 0;
    g.w.assign(n_nodes, 0.0);
    g.v.assign(n_nodes, 0.0);
    return g;
}

/// A half-axis seen from the axis outwards: x[k] = |y[index[k]]| ascending.
struct HalfAxis {
    Side side = Side::plus;
    std::vector<std::size_t> index;
    std::vector<double> x;
    bool origin = false; ///< x[0] == 0 (no excision)

    std::size_t size() const { return x.size(); }
};

inline HalfAxis half_axis(const ProfileGrid& g, Side side) {
    HalfAxis h;
    h.side = side;
    auto [b, e] = g.range(side);
    const std::size_t n = e - b;
    h.index.resize(n);
    h.x.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = side == Side::plus ? b + k : e - 1 - k;
        h.index[k] = i;
        h.x[k] = std::abs(g.y[i]);
    }
    h.origin = h.x.front() == 0.0;
    return h;
}

/// Gathers grid values along a half-axis (outward order).
inline std::vector<double> gather(const HalfAxis& h, std::span<const double> values) {
    std::vector<double> out(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) out[k] = values[h.index[k]];
    return out;
}

} // namespace selfsim
