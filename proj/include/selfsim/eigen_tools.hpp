#pragma once

#include "selfsim/constitutive.hpp"
#include "selfsim/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace selfsim {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Flux Jacobian A(u) and diffusion matrix B(u) of u_t + f(u)_x = (B(u) u_x)_x.
struct DiffusionSystem {
    int n = 2;
    std::function<Mat(const Vec&)> A;
    std::function<Mat(const Vec&)> B;
    double eta = 0.0; ///< nominal |B - I|
};

/// p-system in u = (v, w): A = [[0, -sigma_w], [-1, 0]], eigenvalues -+sqrt(sigma_w).
inline DiffusionSystem p_system(const StressLaw& law, std::function<Mat(const Vec&)> B = {}) {
    DiffusionSystem sys;
    sys.n = 2;
    sys.A = [law](const Vec& u) {
        Mat a(2, 2);
        a << 0.0, -law.deriv(u[1]), -1.0, 0.0;
        return a;
    };
    sys.B = B ? std::move(B) : [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
    return sys;
}

/// Ascending eigenvalues, unit right eigenvectors (largest entry positive) in
/// the columns of R, dual left eigenvectors in the rows of L = R^-1.
struct EigenFrame {
    Vec lambda;
    Mat R;
    Mat L;
};

namespace detail {

inline void fix_sign(Eigen::Ref<Vec> r) {
    Eigen::Index k = 0;
    r.cwiseAbs().maxCoeff(&k);
    if (r[k] < 0.0) r = -r;
}

// Coefficients c_k of det(M - mu B) = sum_k c_k mu^k, from column-subset
// determinants: picking B's columns on a subset S contributes (-1)^|S| det.
inline std::vector<double> pencil_polynomial(const Mat& M, const Mat& B) {
    const int n = static_cast<int>(M.rows());
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        Mat T = M;
        int k = 0;
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j)) {
                T.col(j) = B.col(j);
                ++k;
            }
        c[static_cast<std::size_t>(k)] += (k % 2 ? -1.0 : 1.0) * T.determinant();
    }
    return c;
}

inline double poly_eval(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
    return v;
}

inline double poly_deriv(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) v = v * x + static_cast<double>(k) * c[k];
    return v;
}

// Real roots of a polynomial of degree <= 3 (or the companion matrix beyond),
// polished by Newton. Throws complex_pencil on a complex pair.
inline std::vector<double> real_roots(const std::vector<double>& c) {
    const std::size_t deg = c.size() - 1;
    std::vector<double> roots;
    const double scale = std::accumulate(c.begin(), c.end(), 0.0, [](double a, double b) { return a + std::abs(b); });
    if (deg == 1) {
        roots.push_back(-c[0] / c[1]);
    } else if (deg == 2) {
        const double a = c[2], b = c[1], cc = c[0];
        const double disc = b * b - 4.0 * a * cc;
        if (disc < -1e-12 * b * b - 1e-14 * scale * scale)
            throw SolverError(ErrorCode::complex_pencil, "pencil has complex eigenvalues (disc = " +
                                                             std::to_string(disc) + ")");
        const double sq = std::sqrt(std::max(disc, 0.0));
        const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
        if (q == 0.0) {
            roots = {0.0, 0.0};
        } else {
            roots = {q / a, cc / q};
        }
    } else {
        Mat comp = Mat::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
        for (std::size_t i = 1; i < deg; ++i)
            comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
        for (std::size_t i = 0; i < deg; ++i)
            comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) = -c[i] / c[deg];
        Eigen::EigenSolver<Mat> es(comp, false);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const auto z = es.eigenvalues()[i];
            if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z)))
                throw SolverError(ErrorCode::complex_pencil, "pencil has complex eigenvalues");
            roots.push_back(z.real());
        }
    }
    for (double& r : roots) {
        for (int it = 0; it < 3; ++it) {
            const double d = poly_deriv(c, r);
            if (d == 0.0) break;
            const double step = poly_eval(c, r) / d;
            if (!std::isfinite(step) || std::abs(step) > 1e-6 * std::max(1.0, std::abs(r))) break;
            r -= step;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Unit vector spanning the (numerical) null space of M.
inline Vec null_vector(const Mat& M) {
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
    return svd.matrixV().col(svd.matrixV().cols() - 1);
}

} // namespace detail

inline EigenFrame standard_eigen(const Mat& A) {
    Eigen::EigenSolver<Mat> es(A, true);
    const Eigen::Index n = A.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(es.eigenvalues()[i].imag()) > 1e-10 * std::max(1.0, std::abs(es.eigenvalues()[i])))
            throw SolverError(ErrorCode::complex_pencil, "flux Jacobian has complex eigenvalues");
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return es.eigenvalues()[a].real() < es.eigenvalues()[b].real(); });
    EigenFrame f;
    f.lambda.resize(n);
    f.R.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto k = order[static_cast<std::size_t>(j)];
        f.lambda[j] = es.eigenvalues()[k].real();
        Vec r = es.eigenvectors().col(k).real();
        r.normalize();
        detail::fix_sign(r);
        f.R.col(j) = r;
    }
    f.L = f.R.inverse();
    return f;
}

/// Generalized eigenpairs of (-y + A) r = mu B r and l (-y + A) = mu l B,
/// sorted ascending in mu; r unit with largest entry positive, l scaled so
/// that l_i B r_j = delta_ij.
struct PencilResult {
    Vec mu;
    Mat R;  ///< columns r_j
    Mat L;  ///< rows l_j
};

inline PencilResult generalized_eigen(const Mat& A, const Mat& B, double y) {
    const Eigen::Index n = A.rows();
    require(A.cols() == n && B.rows() == n && B.cols() == n, "A and B must be square of equal size");
    const double bscale = std::max(1.0, B.cwiseAbs().maxCoeff());
    if (std::abs(B.determinant()) <= 1e-12 * std::pow(bscale, static_cast<double>(n)))
        throw SolverError(ErrorCode::pencil_degenerate, "diffusion matrix is singular");
    const Mat M = A - y * Mat::Identity(n, n);
    std::vector<double> mus;
    if (n <= 3) {
        mus = detail::real_roots(detail::pencil_polynomial(M, B));
    } else {
        Eigen::EigenSolver<Mat> es(B.inverse() * M, false);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto z = es.eigenvalues()[i];
            if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z)))
                throw SolverError(ErrorCode::complex_pencil, "pencil has complex eigenvalues");
            mus.push_back(z.real());
        }
        std::sort(mus.begin(), mus.end());
    }
    PencilResult out;
    out.mu = Eigen::Map<Vec>(mus.data(), n);
    out.R.resize(n, n);
    out.L.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Mat P = M - out.mu[j] * B;
        Vec r = detail::null_vector(P);
        detail::fix_sign(r);
        Vec l = detail::null_vector(P.transpose());
        const double s = l.dot(B * r);
        if (std::abs(s) < 1e-14)
            throw SolverError(ErrorCode::pencil_degenerate, "left and right eigenvectors are B-orthogonal");
        out.R.col(j) = r;
        out.L.row(j) = (l / s).transpose();
    }
    return out;
}

inline PencilResult generalized_eigen(const DiffusionSystem& sys, const Vec& u, double y) {
    return generalized_eigen(sys.A(u), sys.B(u), y);
}

/// Transformed diffusion entries b = L B R in the eigenbasis of A.
struct TransformedDiffusion {
    double b11 = 1.0, b12 = 0.0, b21 = 0.0, b22 = 1.0;
    double beta() const { return b12 * b21 / (b11 * b22); }
};

inline TransformedDiffusion transformed_diffusion(const Mat& A, const Mat& B) {
    require(A.rows() == 2, "transformed diffusion entries are defined for 2x2 systems");
    const EigenFrame f = standard_eigen(A);
    const Mat b = f.L * B * f.R;
    return {b(0, 0), b(0, 1), b(1, 0), b(1, 1)};
}

/// Roots of (1 - beta) mu^2 - (a1 + a2) mu + a1 a2 = 0 with a_i = (lambda_i - y)/b_ii,
/// sorted ascending.
inline std::pair<double, double> two_by_two_closed_form(const TransformedDiffusion& b, double lambda1,
                                                        double lambda2, double y) {
    require(b.b11 != 0.0 && b.b22 != 0.0, "closed form needs nonzero diagonal entries");
    const double beta = b.beta();
    if (!(beta > 0.0 && beta < 1.0))
        throw SolverError(ErrorCode::beta_out_of_range, "beta = " + std::to_string(beta) + " outside (0, 1)");
    const double a1 = (lambda1 - y) / b.b11;
    const double a2 = (lambda2 - y) / b.b22;
    const double disc = (a2 - a1) * (a2 - a1) + 4.0 * beta * a1 * a2;
    if (disc < 0.0) throw SolverError(ErrorCode::complex_pencil, "closed-form discriminant is negative");
    const double sum = a1 + a2;
    const double sq = std::sqrt(disc);
    const double q = 0.5 * (sum + (sum >= 0.0 ? sq : -sq));
    double m1, m2;
    if (q == 0.0) {
        m1 = -sq / (2.0 * (1.0 - beta));
        m2 = -m1;
    } else {
        m1 = q / (1.0 - beta);
        m2 = a1 * a2 / q;
    }
    return {std::min(m1, m2), std::max(m1, m2)};
}

struct AdmissibilitySample {
    Vec u;
    TransformedDiffusion b;
    bool b11_positive = false;
    bool b22_positive = false;
    bool coupling_positive = false;
    bool beta_in_range = false;
    bool admissible() const { return b11_positive && b22_positive && coupling_positive && beta_in_range; }
};

inline std::vector<AdmissibilitySample> admissibility_check(const DiffusionSystem& sys, const std::vector<Vec>& samples) {
    require(sys.n == 2, "admissibility check is defined for 2x2 systems");
    std::vector<AdmissibilitySample> out;
    for (const Vec& u : samples) {
        AdmissibilitySample s;
        s.u = u;
        s.b = transformed_diffusion(sys.A(u), sys.B(u));
        s.b11_positive = s.b.b11 > 0.0;
        s.b22_positive = s.b.b22 > 0.0;
        s.coupling_positive = s.b.b12 * s.b.b21 > 0.0;
        const double beta = s.b.beta();
        s.beta_in_range = beta > 0.0 && beta < 1.0;
        out.push_back(s);
    }
    return out;
}

/// Deviations from the B = I eigenstructure at one eta.
struct PerturbationSample {
    double eta = 0.0;
    double mu_dev = 0.0;     ///< max_j |mu_j - (lambda_j - y)|
    double r_dev = 0.0;      ///< max_j |r_hat_j - r_j|
    double l_dev = 0.0;      ///< max_j |l_hat_j - l_j|
    double coupling = 0.0;   ///< max_ij |l_hat_i B d/dy r_hat_j|
};

struct PerturbationReport {
    std::vector<PerturbationSample> samples;
    double slope_mu = 0.0, slope_r = 0.0, slope_l = 0.0, slope_coupling = 0.0;
};

namespace detail {

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace detail

inline PerturbationSample perturbation_sample(const Mat& A, const Mat& T, double eta, double y, double hy = 1e-4) {
    const Eigen::Index n = A.rows();
    const Mat B = Mat::Identity(n, n) + eta * T;
    const EigenFrame f = standard_eigen(A);
    const PencilResult p = generalized_eigen(A, B, y);
    PerturbationSample s;
    s.eta = eta;
    const PencilResult pp = generalized_eigen(A, B, y + hy);
    const PencilResult pm = generalized_eigen(A, B, y - hy);
    for (Eigen::Index j = 0; j < n; ++j) {
        s.mu_dev = std::max(s.mu_dev, std::abs(p.mu[j] - (f.lambda[j] - y)));
        s.r_dev = std::max(s.r_dev, (p.R.col(j) - f.R.col(j)).norm());
        s.l_dev = std::max(s.l_dev, (p.L.row(j) - f.L.row(j)).norm());
        const Vec dr = (pp.R.col(j) - pm.R.col(j)) / (2.0 * hy);
        for (Eigen::Index i = 0; i < n; ++i) s.coupling = std::max(s.coupling, std::abs(p.L.row(i) * B * dr));
    }
    return s;
}

/// Log-log slopes of the deviations against eta for B = I + eta T.
inline PerturbationReport perturbation_scaling(const Mat& A, const Mat& T, double y, const std::vector<double>& etas) {
    PerturbationReport rep;
    std::vector<double> e, mu, r, l, c;
    for (double eta : etas) {
        const PerturbationSample s = perturbation_sample(A, T, eta, y);
        rep.samples.push_back(s);
        e.push_back(eta);
        mu.push_back(s.mu_dev);
        r.push_back(s.r_dev);
        l.push_back(s.l_dev);
        c.push_back(s.coupling);
    }
    if (etas.size() >= 2) {
        rep.slope_mu = detail::loglog_slope(e, mu);
        rep.slope_r = detail::loglog_slope(e, r);
        rep.slope_l = detail::loglog_slope(e, l);
        rep.slope_coupling = detail::loglog_slope(e, c);
    }
    return rep;
}

enum class LaxVerdict { holds, fails, marginal };

inline const char* to_string(LaxVerdict v) {
    switch (v) {
    case LaxVerdict::holds: return "holds";
    case LaxVerdict::fails: return "fails";
    case LaxVerdict::marginal: return "marginal";
    }
    return "fails";
}

struct Shock {
    Vec u_minus;
    Vec u_plus;
    double s = 0.0;
    int family = 0; ///< 0-based characteristic family
};

struct LaxReport {
    LaxVerdict standard_lax = LaxVerdict::fails;
    LaxVerdict generalized_lax = LaxVerdict::fails;
    double lambda_minus = 0.0, lambda_plus = 0.0;       ///< lambda_j(u-), lambda_j(u+)
    double lambda_hat_minus = 0.0, lambda_hat_plus = 0.0; ///< <r_hat, A r_hat> at y = s
    bool agree() const { return standard_lax == generalized_lax; }
};

/// Sign of grad(lambda_j) . r_j on 101 points of the segment [u-, u+]; throws
/// gnl_violated if it changes or vanishes.
inline void check_gnl(const DiffusionSystem& sys, const Vec& a, const Vec& b, int family, double h = 1e-6) {
    int sign = 0;
    Vec r_prev;
    for (int k = 0; k <= 100; ++k) {
        const Vec u = a + (b - a) * (k / 100.0);
        const EigenFrame f = standard_eigen(sys.A(u));
        Vec r = f.R.col(family);
        if (r_prev.size() && r.dot(r_prev) < 0.0) r = -r;
        r_prev = r;
        const double lp = standard_eigen(sys.A(u + h * r)).lambda[family];
        const double lm = standard_eigen(sys.A(u - h * r)).lambda[family];
        const double g = (lp - lm) / (2.0 * h);
        const int sg = g > 1e-10 ? 1 : g < -1e-10 ? -1 : 0;
        if (sg == 0 || (sign != 0 && sg != sign))
            throw SolverError(ErrorCode::gnl_violated,
                              "family " + std::to_string(family + 1) + " is not genuinely nonlinear on the segment");
        sign = sg;
    }
}

/// Standard Lax lambda_j(u+) < s < lambda_j(u-) against the generalized speeds
/// lambda_hat_j = <r_hat_j, A r_hat_j> of the pencil at y = s.
inline LaxReport lax_equivalence(const DiffusionSystem& sys, const Shock& sh, double tol = 1e-10,
                                 bool require_gnl = true) {
    if (require_gnl) check_gnl(sys, sh.u_minus, sh.u_plus, sh.family);
    LaxReport rep;
    const int j = sh.family;
    rep.lambda_minus = standard_eigen(sys.A(sh.u_minus)).lambda[j];
    rep.lambda_plus = standard_eigen(sys.A(sh.u_plus)).lambda[j];
    auto hat = [&](const Vec& u) {
        const PencilResult p = generalized_eigen(sys, u, sh.s);
        const Vec r = p.R.col(j);
        return r.dot(sys.A(u) * r);
    };
    rep.lambda_hat_minus = hat(sh.u_minus);
    rep.lambda_hat_plus = hat(sh.u_plus);
    auto verdict = [&](double plus, double minus) {
        const double lo = sh.s - plus, hi = minus - sh.s;
        if (std::abs(lo) <= tol || std::abs(hi) <= tol) return LaxVerdict::marginal;
        return lo > 0.0 && hi > 0.0 ? LaxVerdict::holds : LaxVerdict::fails;
    };
    rep.standard_lax = verdict(rep.lambda_plus, rep.lambda_minus);
    rep.generalized_lax = verdict(rep.lambda_hat_plus, rep.lambda_hat_minus);
    return rep;
}

/// Point on the p-system Hugoniot locus from u- = (v-, w-) with given w+:
/// s^2 = [sigma]/[w], [v] = -s [w]; family 0 has s < 0, family 1 has s > 0.
inline Shock p_system_shock(const StressLaw& law, double v_minus, double w_minus, double w_plus, int family) {
    const double dw = w_plus - w_minus;
    require(dw != 0.0, "shock needs w+ != w-");
    const double s2 = (law.sigma(w_plus) - law.sigma(w_minus)) / dw;
    require(s2 > 0.0, "Hugoniot chord speed must be real");
    const double s = family == 0 ? -std::sqrt(s2) : std::sqrt(s2);
    Shock sh;
    sh.u_minus = Vec(2);
    sh.u_plus = Vec(2);
    sh.u_minus << v_minus, w_minus;
    sh.u_plus << v_minus - s * dw, w_plus;
    sh.s = s;
    sh.family = family;
    return sh;
}

} // namespace selfsim
