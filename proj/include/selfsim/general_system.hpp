#pragma once

#include "selfsim/eigen_tools.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/expression.hpp"
#include "selfsim/grid.hpp"
#include "selfsim/quadrature.hpp"
#include "selfsim/wave_measure.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace selfsim {

/// v_t - F(w)_x = 0, w_t - v_x = 0 with w in R^N; A(w) = D_w F(w).
struct FluxSystem {
    int N = 1;
    std::function<Vec(const Vec&)> F;
    std::function<Mat(const Vec&)> A;

    /// Components of F in the expression grammar over w1..wN; the Jacobian is
    /// differentiated symbolically.
    static FluxSystem from_expressions(const std::vector<std::string>& components) {
        const std::size_t n = components.size();
        require(n >= 1, "flux needs at least one component");
        const auto names = variable_names("w", n);
        std::vector<Expression> f, df;
        for (const auto& c : components) f.push_back(Expression::parse(c, names));
        for (const auto& e : f)
            for (std::size_t k = 0; k < n; ++k) df.push_back(e.derivative(k));
        FluxSystem s;
        s.N = static_cast<int>(n);
        s.F = [f](const Vec& w) {
            Vec out(static_cast<Eigen::Index>(f.size()));
            for (std::size_t i = 0; i < f.size(); ++i)
                out[static_cast<Eigen::Index>(i)] = f[i](std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
            return out;
        };
        s.A = [df, n](const Vec& w) {
            Mat a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            const std::span<const double> x(w.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < n; ++k)
                    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = df[i * n + k](x);
            return a;
        };
        return s;
    }

    /// Scalar p-system: F = sigma, A = sigma_w.
    static FluxSystem scalar(const StressLaw& law) {
        FluxSystem s;
        s.N = 1;
        s.F = [law](const Vec& w) { return Vec::Constant(1, law.sigma(w[0])); };
        s.A = [law](const Vec& w) { return Mat::Constant(1, 1, law.deriv(w[0])); };
        return s;
    }
};

/// Eigenframe of A(w) with eigenvalues lambda_j^2 > 0 ascending.
struct StateFrame {
    Vec lambda_sq;
    Mat R; ///< columns r_j
    Mat L; ///< rows l_j
};

inline StateFrame state_frame(const FluxSystem& sys, const Vec& w, const Mat* align = nullptr) {
    const EigenFrame f = standard_eigen(sys.A(w));
    StateFrame s{f.lambda, f.R, f.L};
    if (align) {
        for (Eigen::Index j = 0; j < s.R.cols(); ++j)
            if (s.R.col(j).dot(align->col(j)) < 0.0) {
                s.R.col(j) *= -1.0;
                s.L.row(j) *= -1.0;
            }
    }
    for (Eigen::Index j = 0; j < s.lambda_sq.size(); ++j)
        if (!(s.lambda_sq[j] > 0.0))
            throw SolverError(ErrorCode::invalid_argument, "A(w) must have positive eigenvalues");
    for (Eigen::Index j = 1; j < s.lambda_sq.size(); ++j)
        if (s.lambda_sq[j] - s.lambda_sq[j - 1] < 1e-8)
            throw SolverError(ErrorCode::eigen_gap_collapse, "eigenvalues of A(w) closer than 1e-8");
    return s;
}

struct FamilyDecomposition {
    std::vector<double> y;
    std::vector<Vec> w;
    std::vector<Vec> dw;                    ///< finite-difference w'
    std::vector<StateFrame> frames;
    std::vector<std::vector<double>> a;     ///< a[j][node]
    std::vector<std::vector<double>> lambda; ///< lambda[j][node] = sqrt(lambda_j^2)

    int families() const { return static_cast<int>(a.size()); }
    /// max_node |w' - sum_j a_j r_j|
    double reconstruction_residual() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            Vec s = Vec::Zero(dw[i].size());
            for (std::size_t j = 0; j < a.size(); ++j) s += a[j][i] * frames[i].R.col(static_cast<Eigen::Index>(j));
            worst = std::max(worst, (s - dw[i]).lpNorm<Eigen::Infinity>());
        }
        return worst;
    }
};

namespace detail {

inline std::vector<Vec> derivative_field(const std::vector<double>& y, const std::vector<Vec>& w) {
    const std::size_t n = y.size();
    std::vector<Vec> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? n - 1 : i + 1;
        d[i] = (w[b] - w[a]) / (y[b] - y[a]);
    }
    return d;
}

inline std::vector<double> derivative_field(const std::vector<double>& y, const std::vector<double>& f) {
    const std::size_t n = y.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? n - 1 : i + 1;
        d[i] = (f[b] - f[a]) / (y[b] - y[a]);
    }
    return d;
}

} // namespace detail

/// Frames of A(w(y)) node by node (signs kept continuous along the profile)
/// and a_j = <l_j, w'>.
inline FamilyDecomposition decompose(const FluxSystem& sys, const std::vector<double>& y, const std::vector<Vec>& w) {
    require(y.size() == w.size() && y.size() >= 3, "decompose needs matching y and w with >= 3 nodes");
    FamilyDecomposition d;
    d.y = y;
    d.w = w;
    d.dw = detail::derivative_field(y, w);
    const std::size_t n = y.size();
    d.a.assign(static_cast<std::size_t>(sys.N), std::vector<double>(n));
    d.lambda.assign(static_cast<std::size_t>(sys.N), std::vector<double>(n));
    d.frames.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.frames.push_back(state_frame(sys, w[i], i ? &d.frames[i - 1].R : nullptr));
        const Vec aj = d.frames[i].L * d.dw[i];
        for (int j = 0; j < sys.N; ++j) {
            d.a[static_cast<std::size_t>(j)][i] = aj[j];
            d.lambda[static_cast<std::size_t>(j)][i] = std::sqrt(d.frames[i].lambda_sq[j]);
        }
    }
    return d;
}

/// Projected interaction sources per family and node.
struct Sources {
    std::vector<std::vector<double>> D1, D2, D3;

    double l1_norm(const std::vector<double>& y, const std::vector<std::vector<double>>& f) const {
        double s = 0.0;
        for (const auto& fj : f) {
            std::vector<double> abs(fj.size());
            std::transform(fj.begin(), fj.end(), abs.begin(), [](double v) { return std::abs(v); });
            s += quad::trapezoid(y, abs);
        }
        return s;
    }
};

namespace detail {

// (D_u r_i) r_k at state u: directional derivative of r_i along r_k.
inline Vec frame_derivative(const FluxSystem& sys, const Vec& u, const StateFrame& f, int i, int k, double h) {
    const Vec dir = f.R.col(k);
    const StateFrame p = state_frame(sys, u + h * dir, &f.R);
    const StateFrame m = state_frame(sys, u - h * dir, &f.R);
    return (p.R.col(i) - m.R.col(i)) / (2.0 * h);
}

} // namespace detail

/// D1 = -eps y sum a_i a_k (D_u r_i . r_k); for gamma > 0 also
/// D2 = -gamma eps^2 (sum a_i a_k' (D_u r_i . r_k) + sum (a_i a_k)' (D_u r_i . r_k)) and
/// D3 = -gamma eps^2 sum a_i a_k a_l D_u(D_u r_i . r_k) . r_l, each projected with l_j.
inline Sources assemble_sources(const FluxSystem& sys, const FamilyDecomposition& d, double eps, double gamma,
                                double h = 1e-5) {
    const int N = d.families();
    const std::size_t n = d.y.size();
    Sources s;
    s.D1.assign(static_cast<std::size_t>(N), std::vector<double>(n, 0.0));
    if (gamma > 0.0) {
        s.D2 = s.D1;
        s.D3 = s.D1;
    }
    std::vector<std::vector<double>> da(static_cast<std::size_t>(N));
    std::vector<std::vector<std::vector<double>>> daa;
    if (gamma > 0.0) {
        for (int j = 0; j < N; ++j) da[static_cast<std::size_t>(j)] = detail::derivative_field(d.y, d.a[static_cast<std::size_t>(j)]);
        daa.assign(static_cast<std::size_t>(N), std::vector<std::vector<double>>(static_cast<std::size_t>(N)));
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) {
                std::vector<double> p(n);
                for (std::size_t q = 0; q < n; ++q)
                    p[q] = d.a[static_cast<std::size_t>(i)][q] * d.a[static_cast<std::size_t>(k)][q];
                daa[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = detail::derivative_field(d.y, p);
            }
    }
    const double h2 = 1e-3; // outer step of the nested difference in D3
    for (std::size_t q = 0; q < n; ++q) {
        const Vec& u = d.w[q];
        const StateFrame& f = d.frames[q];
        Vec v1 = Vec::Zero(N), v2 = Vec::Zero(N), v3 = Vec::Zero(N);
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) {
                const double ai = d.a[static_cast<std::size_t>(i)][q], ak = d.a[static_cast<std::size_t>(k)][q];
                const Vec g = detail::frame_derivative(sys, u, f, i, k, h);
                v1 += ai * ak * g;
                if (gamma > 0.0) {
                    v2 += (ai * da[static_cast<std::size_t>(k)][q] +
                           daa[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)][q]) * g;
                    for (int l = 0; l < N; ++l) {
                        const double al = d.a[static_cast<std::size_t>(l)][q];
                        const Vec dir = f.R.col(l);
                        const StateFrame fp = state_frame(sys, u + h2 * dir, &f.R);
                        const StateFrame fm = state_frame(sys, u - h2 * dir, &f.R);
                        const Vec gp = detail::frame_derivative(sys, u + h2 * dir, fp, i, k, h);
                        const Vec gm = detail::frame_derivative(sys, u - h2 * dir, fm, i, k, h);
                        v3 += ai * ak * al * (gp - gm) / (2.0 * h2);
                    }
                }
            }
        v1 *= -eps * d.y[q];
        const Vec p1 = f.L * v1;
        const Vec p2 = f.L * (-gamma * eps * eps * v2);
        const Vec p3 = f.L * (-gamma * eps * eps * v3);
        for (int j = 0; j < N; ++j) {
            s.D1[static_cast<std::size_t>(j)][q] = p1[j];
            if (gamma > 0.0) {
                s.D2[static_cast<std::size_t>(j)][q] = p2[j];
                s.D3[static_cast<std::size_t>(j)][q] = p3[j];
            }
        }
    }
    return s;
}

/// Wave measure of family j on a half-axis: the scalar construction with
/// sigma_w replaced by lambda_j^2.
inline WaveMeasure family_wave_measure(const std::vector<double>& lambda, const HalfAxis& h, double eps, double gamma) {
    require(lambda.size() == h.size(), "lambda field must match the half-axis");
    std::vector<double> s(lambda.size());
    std::transform(lambda.begin(), lambda.end(), s.begin(), [](double l) { return l * l; });
    const SpeedField f = speed_field(h.x, std::move(s));
    return gamma > 0.0 ? capillary_measure(h, f, eps, gamma) : viscous_measure(h, f, eps);
}

/// Integral of min(phi_i, phi_j) over the common support.
inline double cross_mass(const WaveMeasure& a, const WaveMeasure& b) {
    require(a.size() == b.size(), "measures must share a support");
    std::vector<double> m(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) m[k] = std::min(a.density[k], b.density[k]);
    return quad::trapezoid(a.x, m);
}

struct CoupledUpdate {
    std::vector<std::vector<double>> a;
    double relative_change = 0.0; ///< ||a_new - a_old||_L1 / ||a_old||_L1
};

/// One inversion of eps y a_j' + (y^2 + eps - lambda_j^2) a_j = rhs_j per family
/// with int a_j = alpha_j: a_j = c_j phi_j + a_p, where a_p is the
/// variation-of-constants integral started at the concentration point.
inline CoupledUpdate coupled_iteration(const FamilyDecomposition& d, const std::vector<WaveMeasure>& measures,
                                       const std::vector<std::vector<double>>& rhs, const std::vector<double>& alpha,
                                       double amplitude_cap = 0.1) {
    const int N = d.families();
    require(static_cast<int>(measures.size()) == N && static_cast<int>(rhs.size()) == N &&
                static_cast<int>(alpha.size()) == N,
            "coupled iteration needs one measure, source and boundary coefficient per family");
    double amp = 0.0;
    double old_norm = 0.0;
    for (const auto& aj : d.a) {
        std::vector<double> abs(aj.size());
        std::transform(aj.begin(), aj.end(), abs.begin(), [](double v) { return std::abs(v); });
        amp += quad::trapezoid(d.y, abs);
    }
    old_norm = amp;
    if (amp > amplitude_cap)
        throw SolverError(ErrorCode::amplitude_cap_exceeded,
                          "sum of |a_j|_L1 = " + std::to_string(amp) + " exceeds cap " + std::to_string(amplitude_cap));
    CoupledUpdate up;
    double diff = 0.0;
    for (int j = 0; j < N; ++j) {
        const WaveMeasure& m = measures[static_cast<std::size_t>(j)];
        const auto& r = rhs[static_cast<std::size_t>(j)];
        const std::size_t n = m.size();
        require(n == d.y.size(), "measure support must match the decomposition grid");
        const double eps = m.eps;
        std::vector<double> K(n);
        for (std::size_t k = 0; k < n; ++k) K[k] = r[m.index[k]] / (eps * m.x_eval[k]);
        const std::size_t p = static_cast<std::size_t>(std::max_element(m.exponent.begin(), m.exponent.end()) -
                                                       m.exponent.begin());
        std::vector<double> ap(n, 0.0);
        for (std::size_t k = p + 1; k < n; ++k) {
            const double f = std::exp(m.exponent[k] - m.exponent[k - 1]);
            ap[k] = ap[k - 1] * f + 0.5 * (m.x[k] - m.x[k - 1]) * (K[k - 1] * f + K[k]);
        }
        for (std::size_t k = p; k-- > 0;) {
            const double f = std::exp(m.exponent[k] - m.exponent[k + 1]);
            ap[k] = ap[k + 1] * f - 0.5 * (m.x[k + 1] - m.x[k]) * (K[k + 1] * f + K[k]);
        }
        const double c = alpha[static_cast<std::size_t>(j)] - quad::trapezoid(m.x, ap);
        std::vector<double> a(d.y.size());
        for (std::size_t k = 0; k < n; ++k) a[m.index[k]] = c * m.density[k] + ap[k];
        std::vector<double> dd(a.size());
        for (std::size_t q = 0; q < a.size(); ++q) dd[q] = std::abs(a[q] - d.a[static_cast<std::size_t>(j)][q]);
        diff += quad::trapezoid(d.y, dd);
        up.a.push_back(std::move(a));
    }
    up.relative_change = old_norm > 0.0 ? diff / old_norm : 0.0;
    return up;
}

/// Record of the small-amplitude boundary iteration for the N-system.
struct CoupledRun {
    std::vector<double> y;
    std::vector<Vec> w;
    std::vector<double> changes;       ///< sup |w_{k+1} - w_k|
    std::vector<double> contraction;   ///< changes[k+1] / changes[k]
    std::vector<double> relative_a_change;
    std::vector<double> d1_norm;
    double endpoint_defect = 0.0;      ///< |w(L) - w_r|
};

/// Boundary problem w(0) = w_b, w(L) = w_r for the viscous N-system, iterated
/// through coupled_iteration: decompose, build family measures from
/// lambda_j(w(y)), assemble D1, invert, and re-integrate w' = sum a_j r_j.
inline CoupledRun iterate_coupled(const FluxSystem& sys, const Vec& w_b, const Vec& w_r, double eps, double L,
                                  std::size_t n_nodes, int iterations, double amplitude_cap = 0.1) {
    ProfileGrid g = make_half_line_grid(L, n_nodes);
    const HalfAxis h = half_axis(g, Side::plus);
    const std::size_t n = g.size();
    const int N = sys.N;
    const StateFrame mid = state_frame(sys, 0.5 * (w_b + w_r));
    Vec alpha = mid.L * (w_r - w_b);

    // Zero-source start: a_j = alpha_j phi_j with frozen frames.
    std::vector<WaveMeasure> ms;
    for (int j = 0; j < N; ++j)
        ms.push_back(family_wave_measure(std::vector<double>(n, std::sqrt(mid.lambda_sq[j])), h, eps, 0.0));
    std::vector<Vec> w(n, w_b);
    auto integrate = [&](const std::vector<std::vector<double>>& a, const std::vector<StateFrame>* frames) {
        std::vector<Vec> out(n, w_b);
        for (std::size_t q = 1; q < n; ++q) {
            Vec s0 = Vec::Zero(N), s1 = Vec::Zero(N);
            for (int j = 0; j < N; ++j) {
                const auto& R0 = frames ? (*frames)[q - 1].R : mid.R;
                const auto& R1 = frames ? (*frames)[q].R : mid.R;
                s0 += a[static_cast<std::size_t>(j)][q - 1] * R0.col(j);
                s1 += a[static_cast<std::size_t>(j)][q] * R1.col(j);
            }
            out[q] = out[q - 1] + 0.5 * (g.y[q] - g.y[q - 1]) * (s0 + s1);
        }
        return out;
    };
    {
        std::vector<std::vector<double>> a0(static_cast<std::size_t>(N), std::vector<double>(n));
        for (int j = 0; j < N; ++j)
            for (std::size_t k = 0; k < n; ++k)
                a0[static_cast<std::size_t>(j)][ms[static_cast<std::size_t>(j)].index[k]] =
                    alpha[j] * ms[static_cast<std::size_t>(j)].density[k];
        w = integrate(a0, nullptr);
    }

    CoupledRun run;
    run.y = g.y;
    for (int it = 0; it < iterations; ++it) {
        const FamilyDecomposition d = decompose(sys, g.y, w);
        ms.clear();
        for (int j = 0; j < N; ++j) ms.push_back(family_wave_measure(d.lambda[static_cast<std::size_t>(j)], h, eps, 0.0));
        const Sources src = assemble_sources(sys, d, eps, 0.0);
        run.d1_norm.push_back(src.l1_norm(g.y, src.D1));
        const CoupledUpdate up =
            coupled_iteration(d, ms, src.D1, std::vector<double>(alpha.data(), alpha.data() + N), amplitude_cap);
        run.relative_a_change.push_back(up.relative_change);
        std::vector<Vec> next = integrate(up.a, &d.frames);
        alpha += d.frames.back().L * (w_r - next.back());
        double change = 0.0;
        for (std::size_t q = 0; q < n; ++q) change = std::max(change, (next[q] - w[q]).lpNorm<Eigen::Infinity>());
        run.changes.push_back(change);
        if (run.changes.size() >= 2) run.contraction.push_back(change / run.changes[run.changes.size() - 2]);
        w = std::move(next);
    }
    run.w = w;
    run.endpoint_defect = (w.back() - w_r).lpNorm<Eigen::Infinity>();
    return run;
}

} // namespace selfsim
