// selfsim: command-line driver for the self-similar Riemann solver suite.
#include "selfsim/checks.hpp"
#include "selfsim/config.hpp"
#include "selfsim/output.hpp"
#include "selfsim/selfsim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace selfsim;

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> law;
    std::optional<double> c0, vl, wl, vr, wr, wb, gamma, delta, L, tol, damping;
    std::optional<std::string> eps;
    std::optional<std::size_t> grid;
    std::optional<int> max_iter, jobs;
    std::optional<std::string> out_dir;
    bool dump_measures = false;
    std::optional<double> t_final, cfl, X, h, r0;
    // eigen / nsystem
    std::string A, B, u = "0,1";
    double y = 0.0;
    std::string flux, wb_vec, wr_vec;
    int iterations = 8;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "INI file with [law] [solver] [sweep] [output]");
    app->add_option("--law", f.law, "linear | hardening | cubic | tabulated");
    app->add_option("--c0", f.c0, "wave speed of the linear law");
    app->add_option("--vl", f.vl);
    app->add_option("--wl", f.wl);
    app->add_option("--vr", f.vr);
    app->add_option("--wr", f.wr);
    app->add_option("--wb", f.wb, "boundary value w(0)");
    app->add_option("--eps", f.eps, "viscosity; a comma list for sweep");
    app->add_option("--gamma", f.gamma, "capillarity ratio, delta = gamma eps^2");
    app->add_option("--delta", f.delta, "excision half-width around y = 0");
    app->add_option("--L", f.L, "half-width of the y domain");
    app->add_option("--grid", f.grid, "number of nodes");
    app->add_option("--tol", f.tol);
    app->add_option("--max-iter", f.max_iter);
    app->add_option("--damping", f.damping, "initial relaxation factor");
    app->add_option("--out-dir", f.out_dir);
    app->add_option("--jobs", f.jobs, "worker threads for sweep");
    app->add_flag("--dump-measures", f.dump_measures, "write phi_minus.csv and phi_plus.csv");
}

RunConfig resolve(const Flags& f, bool eps_list) {
    RunConfig c;
    if (!f.config.empty()) load_config(f.config, c);
    auto set = [](auto& dst, const auto& src) {
        if (src) dst = *src;
    };
    set(c.law, f.law);
    set(c.c0, f.c0);
    set(c.data.v_l, f.vl);
    set(c.data.w_l, f.wl);
    set(c.data.v_r, f.vr);
    set(c.data.w_r, f.wr);
    set(c.w_b, f.wb);
    set(c.solver.gamma, f.gamma);
    set(c.delta, f.delta);
    set(c.solver.L, f.L);
    set(c.solver.n_nodes, f.grid);
    set(c.solver.tol, f.tol);
    set(c.solver.max_iter, f.max_iter);
    set(c.solver.damping, f.damping);
    set(c.out_dir, f.out_dir);
    set(c.jobs, f.jobs);
    set(c.t_final, f.t_final);
    set(c.cfl, f.cfl);
    set(c.X, f.X);
    set(c.h, f.h);
    set(c.r0, f.r0);
    if (f.dump_measures) c.dump_measures = true;
    if (f.eps) {
        const auto v = parse_list(*f.eps);
        if (eps_list) {
            c.eps_list = v;
        } else {
            if (v.size() != 1) throw SolverError(ErrorCode::config_error, "--eps takes a single value here");
            c.solver.eps = v[0];
        }
    }
    c.solver.validate();
    return c;
}

std::vector<double> parse_vec(const std::string& s, const char* what) {
    try {
        return parse_list(s);
    } catch (const SolverError&) {
        throw SolverError(ErrorCode::config_error, std::string("bad vector for ") + what + ": '" + s + "'");
    }
}

// "e11,e12;e21,e22" in the expression grammar over u1..un.
std::function<Mat(const Vec&)> parse_matrix(const std::string& text, std::size_t n) {
    std::vector<std::vector<Expression>> rows;
    std::stringstream ss(text);
    std::string row;
    const auto names = variable_names("u", n);
    while (std::getline(ss, row, ';')) {
        std::vector<Expression> r;
        std::stringstream rs(row);
        std::string cell;
        while (std::getline(rs, cell, ',')) r.push_back(Expression::parse(cell, names));
        rows.push_back(std::move(r));
    }
    if (rows.size() != n)
        throw SolverError(ErrorCode::config_error, "matrix '" + text + "' needs " + std::to_string(n) + " rows");
    for (const auto& r : rows)
        if (r.size() != n)
            throw SolverError(ErrorCode::config_error,
                              "matrix '" + text + "' needs " + std::to_string(n) + " entries per row");
    return [rows, n](const Vec& u) {
        Mat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        const std::span<const double> x(u.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k](x);
        return m;
    };
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

json to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
        rows.push_back(r);
    }
    return rows;
}

void finish_profile(const fs::path& dir, const std::string& stem, const SelfSimilarSolution& s, const RunConfig& c,
                    json summary) {
    write_profile_csv(dir / (stem + ".csv"), s);
    if (c.dump_measures) {
        if (s.phi_minus.size()) write_measure_csv(dir / "phi_minus.csv", s.phi_minus);
        if (s.phi_plus.size()) write_measure_csv(dir / "phi_plus.csv", s.phi_plus);
    }
    summary["config"] = selfsim::to_json(c);
    write_json(dir / "summary.json", summary);
    write_gnuplot(dir / "plot.gp", stem, {{stem + ".csv", {"w", "v"}}, {stem + ".csv", {"phi_minus", "phi_plus"}}});
}

int cmd_solve(const Flags& f) {
    const RunConfig c = resolve(f, false);
    const StressLaw law = make_law(c);
    const SelfSimilarSolution s =
        c.delta > 0.0 ? solve_excised(law, c.solver, c.data, c.delta) : solve_profile(law, c.solver, c.data);
    json j = selfsim::to_json(s);
    const auto env_m = envelope_check(s.phi_minus), env_p = envelope_check(s.phi_plus);
    j["envelope"] = {{"minus", {{"applicable", env_m.applicable}, {"pass", env_m.pass}, {"C1", env_m.fitted_c1}}},
                     {"plus", {{"applicable", env_p.applicable}, {"pass", env_p.pass}, {"C1", env_p.fitted_c1}}}};
    finish_profile(c.out_dir, "profile", s, c, j);
    std::printf("w_star = %.12g\nv_star = %.12g\niterations = %d\ntv_w = %.6g\ntv_v = %.6g\n", s.w_star, s.v_star,
                s.iterations, s.tv_w, s.tv_v);
    return 0;
}

int cmd_sweep(const Flags& f) {
    const RunConfig c = resolve(f, true);
    const StressLaw law = make_law(c);
    SweepResult r = epsilon_sweep(law, c.solver, c.data, c.eps_list, c.r0, 1.5, c.jobs);
    const fs::path dir = c.out_dir;
    std::vector<JumpTable> tables;
    json members = json::array();
    for (std::size_t k = 0; k < r.members.size(); ++k) {
        JumpTable t;
        json jumps = json::array();
        try {
            t = detect_jumps(r.members[k], law, r.eps[k]);
            classify_all(t, law, r.eps[k]);
            for (const auto& jr : t.jumps) jumps.push_back(selfsim::to_json(jr));
        } catch (const SolverError& e) {
            jumps = std::string(e.name()) + ": " + e.what();
        }
        tables.push_back(t);
        json m = selfsim::to_json(r.members[k]);
        m["eps"] = r.eps[k];
        m["jumps"] = jumps;
        members.push_back(m);
        char stem[64];
        std::snprintf(stem, sizeof stem, "profile_eps%g.csv", r.eps[k]);
        write_profile_csv(dir / stem, r.members[k]);
    }
    write_sweep_csv(dir / "sweep_summary.csv", r, c.solver.gamma, tables);
    json j{{"members", members},
           {"distances", r.distances},
           {"ratios", r.ratios},
           {"cauchy", r.cauchy},
           {"max_tv_w", r.max_tv_w},
           {"failures", r.failures},
           {"config", selfsim::to_json(c)}};
    write_json(dir / "sweep_summary.json", j);
    std::vector<std::pair<std::string, std::vector<std::string>>> plots;
    for (double e : r.eps) {
        char stem[64];
        std::snprintf(stem, sizeof stem, "profile_eps%g.csv", e);
        plots.push_back({stem, {"w"}});
    }
    write_gnuplot(dir / "sweep.gp", "eps sweep", plots);
    for (std::size_t k = 0; k < r.distances.size(); ++k)
        std::printf("d[%g -> %g] = %.6g\n", r.eps[k], r.eps[k + 1], r.distances[k]);
    std::printf("cauchy = %s\n", r.cauchy ? "yes" : "no");
    for (const auto& e : r.failures) std::fprintf(stderr, "member failed: %s\n", e.c_str());
    return r.failures.empty() ? 0 : 1;
}

int cmd_boundary(const Flags& f) {
    RunConfig c = resolve(f, false);
    if (!f.wr) c.data.w_r = 0.0;
    if (!f.vr) c.data.v_r = 0.0;
    const StressLaw law = make_law(c);
    const SelfSimilarSolution s = solve_boundary(law, c.solver, {c.w_b, c.data.v_r, c.data.w_r});
    json j = selfsim::to_json(s);
    const auto fit = boundary_layer_check(s);
    j["boundary_layer_C"] = fit.C;
    j["boundary_layer_worst_y"] = fit.worst_y;
    finish_profile(c.out_dir, "boundary_profile", s, c, j);
    std::printf("v(0) = %.12g\nlayer constant C = %.6g\n", *s.v0_trace, fit.C);
    return 0;
}

int cmd_eigen(const Flags& f) {
    const auto u = parse_vec(f.u, "--u");
    const std::size_t n = u.size();
    if (f.A.empty()) throw SolverError(ErrorCode::config_error, "eigen needs --A");
    DiffusionSystem sys;
    sys.n = static_cast<int>(n);
    sys.A = parse_matrix(f.A, n);
    sys.B = f.B.empty() ? std::function<Mat(const Vec&)>([n](const Vec&) {
        return Mat(Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    })
                        : parse_matrix(f.B, n);
    const Vec uu = Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(n));
    const Mat A = sys.A(uu), B = sys.B(uu);
    const EigenFrame fr = standard_eigen(A);
    const PencilResult p = generalized_eigen(A, B, f.y);
    json j{{"u", u},
           {"y", f.y},
           {"A", to_json(A)},
           {"B", to_json(B)},
           {"lambda", to_std(fr.lambda)},
           {"mu", to_std(p.mu)},
           {"r_hat", to_json(p.R)},
           {"l_hat", to_json(p.L)}};
    if (n == 2) {
        const auto t = transformed_diffusion(A, B);
        const auto adm = admissibility_check(sys, {uu});
        j["beta"] = t.beta();
        j["admissible"] = adm.front().admissible();
        if (adm.front().admissible()) {
            const auto [m1, m2] = two_by_two_closed_form(t, fr.lambda[0], fr.lambda[1], f.y);
            j["closed_form_mu"] = {m1, m2};
        }
    }
    json out{{"eigen", j}};
    fs::create_directories(f.out_dir.value_or("."));
    write_json(fs::path(f.out_dir.value_or(".")) / "eigen.json", out);
    std::printf("lambda:");
    for (Eigen::Index k = 0; k < fr.lambda.size(); ++k) std::printf(" %.12g", fr.lambda[k]);
    std::printf("\nmu:");
    for (Eigen::Index k = 0; k < p.mu.size(); ++k) std::printf(" %.12g", p.mu[k]);
    std::printf("\n");
    return 0;
}

int cmd_nsystem(const Flags& f) {
    RunConfig c = resolve(f, false);
    std::vector<std::string> comps;
    std::stringstream ss(f.flux);
    for (std::string s; std::getline(ss, s, ';');) comps.push_back(s);
    if (comps.empty()) throw SolverError(ErrorCode::config_error, "nsystem needs --flux 'f1;f2;...'");
    const FluxSystem sys = FluxSystem::from_expressions(comps);
    const auto wb = parse_vec(f.wb_vec, "--wb-vec"), wr = parse_vec(f.wr_vec, "--wr-vec");
    if (wb.size() != comps.size() || wr.size() != comps.size())
        throw SolverError(ErrorCode::config_error, "--wb-vec and --wr-vec need one entry per flux component");
    const Vec b = Eigen::Map<const Vec>(wb.data(), static_cast<Eigen::Index>(wb.size()));
    const Vec r = Eigen::Map<const Vec>(wr.data(), static_cast<Eigen::Index>(wr.size()));
    const std::size_t nodes = f.grid ? c.solver.n_nodes : 801;
    const CoupledRun run = iterate_coupled(sys, b, r, c.solver.eps, c.solver.L, nodes, f.iterations);
    const fs::path dir = c.out_dir;
    {
        auto out = detail::open_out(dir / "nsystem_profile.csv");
        out << "y";
        for (std::size_t k = 0; k < comps.size(); ++k) out << ",w" << k + 1;
        out << '\n';
        for (std::size_t i = 0; i < run.y.size(); ++i) {
            out << detail::fmt17(run.y[i]);
            for (Eigen::Index k = 0; k < run.w[i].size(); ++k) out << ',' << detail::fmt17(run.w[i][k]);
            out << '\n';
        }
    }
    json j{{"flux", comps},
           {"changes", run.changes},
           {"contraction", run.contraction},
           {"relative_a_change", run.relative_a_change},
           {"d1_norm", run.d1_norm},
           {"endpoint_defect", run.endpoint_defect},
           {"config", selfsim::to_json(c)}};
    write_json(dir / "nsystem.json", j);
    for (std::size_t k = 0; k < run.changes.size(); ++k) std::printf("iteration %zu: change %.6g\n", k + 1, run.changes[k]);
    std::printf("endpoint defect = %.6g\n", run.endpoint_defect);
    return 0;
}

int cmd_oracle(const Flags& f) {
    RunConfig c = resolve(f, false);
    if (!f.X) c.X = std::max(c.X, c.solver.L * c.t_final);
    const StressLaw law = make_law(c);
    const double eps = c.solver.eps, delta = c.solver.capillarity();
    const OracleResult ev = evolve(law, c.data, {eps, delta, c.X, c.t_final, c.cfl, c.h});
    const SelfSimilarSolution s = solve_profile(law, c.solver, c.data);
    const OracleComparison cmp = self_similar_compare(ev, s, c.r0);
    const fs::path dir = c.out_dir;
    write_oracle_csv(dir / "oracle.csv", cmp, s);
    json j{{"l1_w", cmp.l1_w},
           {"l1_v", cmp.l1_v},
           {"t_final", ev.t},
           {"steps", ev.steps},
           {"h", ev.h},
           {"mass_w_defect", ev.mass_w_defect},
           {"mass_v_defect", ev.mass_v_defect},
           {"profile", selfsim::to_json(s)},
           {"config", selfsim::to_json(c)}};
    write_json(dir / "oracle_summary.json", j);
    write_gnuplot(dir / "oracle.gp", "oracle", {{"oracle.csv", {"w_evolved", "w_profile"}}});
    std::printf("L1(w) = %.6g\nL1(v) = %.6g\nsteps = %zu\n", cmp.l1_w, cmp.l1_v, ev.steps);
    return 0;
}

int cmd_check() {
    const auto results = run_checks();
    bool ok = true;
    for (const auto& r : results) {
        std::printf("%-4s  %-52s %11.4g  (limit %.3g)%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value,
                    r.limit, r.note.empty() ? "" : "  ", r.note.c_str());
        ok = ok && r.pass;
    }
    std::printf("%s\n", ok ? "all checks passed" : "some checks failed");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-similar viscous/capillary Riemann solver"};
    app.require_subcommand(1);
    Flags f;

    auto* solve = app.add_subcommand("solve", "full-line Riemann profile");
    add_common(solve, f);
    auto* sweep = app.add_subcommand("sweep", "eps sweep with Cauchy distances and jump tables");
    add_common(sweep, f);
    sweep->add_option("--r0", f.r0, "exclusion radius for the L1 distances");
    auto* boundary = app.add_subcommand("boundary", "half-line problem with w(0) = wb");
    add_common(boundary, f);
    auto* eigen = app.add_subcommand("eigen", "standard and generalized eigenstructure at one state");
    eigen->add_option("--A", f.A, "matrix 'a11,a12;a21,a22' over u1..un")->required();
    eigen->add_option("--B", f.B, "diffusion matrix, identity if omitted");
    eigen->add_option("--u", f.u, "state, comma separated");
    eigen->add_option("--y", f.y, "similarity variable");
    eigen->add_option("--out-dir", f.out_dir);
    auto* nsystem = app.add_subcommand("nsystem", "small-amplitude boundary iteration for an N-system");
    add_common(nsystem, f);
    nsystem->add_option("--flux", f.flux, "components 'f1;f2' over w1..wN")->required();
    nsystem->add_option("--wb-vec", f.wb_vec, "boundary state w(0)")->required();
    nsystem->add_option("--wr-vec", f.wr_vec, "far state w(L)")->required();
    nsystem->add_option("--iterations", f.iterations);
    auto* oracle = app.add_subcommand("oracle", "time-dependent run compared with the self-similar profile");
    add_common(oracle, f);
    oracle->add_option("--t-final", f.t_final);
    oracle->add_option("--cfl", f.cfl);
    oracle->add_option("--X", f.X, "domain half-width");
    oracle->add_option("--dx", f.h, "cell size");
    oracle->add_option("--r0", f.r0);
    auto* check = app.add_subcommand("check", "built-in invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) return cmd_solve(f);
        if (sweep->parsed()) return cmd_sweep(f);
        if (boundary->parsed()) return cmd_boundary(f);
        if (eigen->parsed()) return cmd_eigen(f);
        if (nsystem->parsed()) return cmd_nsystem(f);
        if (oracle->parsed()) return cmd_oracle(f);
        if (check->parsed()) return cmd_check();
    } catch (const SolverError& e) {
        std::fprintf(stderr, "error: %s: %s\n", std::string(e.name()).c_str(), e.what());
        return e.code() == ErrorCode::config_error || e.code() == ErrorCode::invalid_argument ? 2 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
