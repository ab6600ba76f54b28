#pragma once

#include "selfsim/config.hpp"
#include "selfsim/limit_analysis.hpp"
#include "selfsim/oracle_pde.hpp"
#include "selfsim/riemann_solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace selfsim {

using nlohmann::json;

namespace detail {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw SolverError(ErrorCode::config_error, "cannot write '" + p.string() + "'");
    return f;
}

// Density of m scattered back onto grid nodes (0 off the support).
inline std::vector<double> on_grid(const WaveMeasure& m, std::size_t n) {
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < m.size(); ++k)
        if (m.index[k] < n) out[m.index[k]] = m.density[k];
    return out;
}

} // namespace detail

/// y,w,v,phi_minus,phi_plus at 17 significant digits.
inline void write_profile_csv(const std::filesystem::path& path, const SelfSimilarSolution& s) {
    auto f = detail::open_out(path);
    const auto& g = s.grid;
    const auto pm = detail::on_grid(s.phi_minus, g.size());
    const auto pp = detail::on_grid(s.phi_plus, g.size());
    f << "y,w,v,phi_minus,phi_plus\n";
    for (std::size_t i = 0; i < g.size(); ++i)
        f << detail::fmt17(g.y[i]) << ',' << detail::fmt17(g.w[i]) << ',' << detail::fmt17(g.v[i]) << ','
          << detail::fmt17(pm[i]) << ',' << detail::fmt17(pp[i]) << '\n';
}

inline void write_measure_csv(const std::filesystem::path& path, const WaveMeasure& m) {
    auto f = detail::open_out(path);
    f << "y,density,log_density,exponent,tail\n";
    for (std::size_t k = 0; k < m.size(); ++k)
        f << detail::fmt17(m.signed_y(k)) << ',' << detail::fmt17(m.density[k]) << ','
          << detail::fmt17(m.log_density[k]) << ',' << detail::fmt17(m.exponent[k]) << ','
          << detail::fmt17(m.tail[k]) << '\n';
}

inline json to_json(const RunConfig& c) {
    return json{{"law", {{"law", c.law}, {"c0", c.c0}, {"table", c.table}}},
                {"solver",
                 {{"vl", c.data.v_l},
                  {"wl", c.data.w_l},
                  {"vr", c.data.v_r},
                  {"wr", c.data.w_r},
                  {"wb", c.w_b},
                  {"eps", c.solver.eps},
                  {"gamma", c.solver.gamma},
                  {"delta", c.delta},
                  {"L", c.solver.L},
                  {"grid", c.solver.n_nodes},
                  {"tol", c.solver.tol},
                  {"max-iter", c.solver.max_iter},
                  {"damping", c.solver.damping},
                  {"t-final", c.t_final},
                  {"cfl", c.cfl},
                  {"X", c.X},
                  {"dx", c.h}}},
                {"sweep", {{"eps", c.eps_list}, {"r0", c.r0}, {"jobs", c.jobs}}},
                {"output", {{"out-dir", c.out_dir}, {"dump-measures", c.dump_measures}}}};
}

inline json to_json(const SelfSimilarSolution& s) {
    json j{{"w_star", s.w_star},
           {"v_star", s.v_star},
           {"tv_w", s.tv_w},
           {"tv_v", s.tv_v},
           {"weighted_tv_w", s.weighted_tv_w},
           {"sup_yw", s.sup_yw},
           {"conservation_defect", s.conservation_defect},
           {"residual_ode", s.residual_ode},
           {"denominator_D", s.denominator_D},
           {"lambda_M", s.lambda_M},
           {"lambda_m", s.lambda_m},
           {"phi_error_bound", s.phi_error_bound},
           {"rho_minus", s.rho_minus()},
           {"rho_plus", s.rho_plus()},
           {"rho_candidates_minus", s.rho_candidates_minus},
           {"rho_candidates_plus", s.rho_candidates_plus},
           {"iterations", s.iterations},
           {"final_change", s.final_change},
           {"final_damping", s.final_damping},
           {"converged", s.converged},
           {"middle_bound_ok", s.middle_bound_ok},
           {"nodes", s.grid.size()},
           {"excision_delta", s.grid.delta}};
    if (s.v0_trace) j["v0_trace"] = *s.v0_trace;
    return j;
}

inline json to_json(const JumpRecord& r) {
    return json{{"s", r.s},
                {"v_minus", r.v_minus},
                {"w_minus", r.w_minus},
                {"v_plus", r.v_plus},
                {"w_plus", r.w_plus},
                {"rh_mass", r.rh_mass},
                {"rh_momentum", r.rh_momentum},
                {"classification", to_string(r.classification)}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    auto f = detail::open_out(path);
    f << j.dump(2) << '\n';
}

/// One row per member: eps, gamma, delta, w_star, tv_w, tv_v, weighted_tv, jumps flattened.
inline void write_sweep_csv(const std::filesystem::path& path, const SweepResult& r, double gamma,
                            const std::vector<JumpTable>& jumps) {
    auto f = detail::open_out(path);
    f << "eps,gamma,delta,w_star,v_star,tv_w,tv_v,weighted_tv,distance_to_next,jumps\n";
    for (std::size_t k = 0; k < r.members.size(); ++k) {
        const auto& m = r.members[k];
        f << detail::fmt17(r.eps[k]) << ',' << detail::fmt17(gamma) << ','
          << detail::fmt17(gamma * r.eps[k] * r.eps[k]) << ',' << detail::fmt17(m.w_star) << ','
          << detail::fmt17(m.v_star) << ',' << detail::fmt17(m.tv_w) << ',' << detail::fmt17(m.tv_v) << ','
          << detail::fmt17(m.weighted_tv_w) << ',' << (k < r.distances.size() ? detail::fmt17(r.distances[k]) : "")
          << ',';
        if (k < jumps.size()) {
            std::string cell;
            for (const auto& j : jumps[k].jumps) {
                if (!cell.empty()) cell += ';';
                cell += detail::fmt17(j.s) + ':' + detail::fmt17(j.w_minus) + ':' + detail::fmt17(j.w_plus) + ':' +
                        to_string(j.classification);
            }
            f << '"' << cell << '"';
        }
        f << '\n';
    }
}

inline void write_oracle_csv(const std::filesystem::path& path, const OracleComparison& c,
                             const SelfSimilarSolution& s) {
    auto f = detail::open_out(path);
    f << "y,w_evolved,v_evolved,w_profile,v_profile\n";
    for (std::size_t i = 0; i < c.y.size(); ++i)
        f << detail::fmt17(c.y[i]) << ',' << detail::fmt17(c.w_evolved[i]) << ',' << detail::fmt17(c.v_evolved[i])
          << ',' << detail::fmt17(s.grid.w[i]) << ',' << detail::fmt17(s.grid.v[i]) << '\n';
}

/// gnuplot script plotting the listed CSVs (first column against the named ones).
inline void write_gnuplot(const std::filesystem::path& path, const std::string& title,
                          const std::vector<std::pair<std::string, std::vector<std::string>>>& plots) {
    auto f = detail::open_out(path);
    f << "# gnuplot " << path.filename().string() << "\n";
    f << "set datafile separator ','\nset key autotitle columnhead\nset grid\n";
    f << "set terminal pngcairo size 1000,700\n";
    for (const auto& [csv, cols] : plots) {
        const std::string stem = std::filesystem::path(csv).stem().string();
        f << "set output '" << stem << ".png'\nset title '" << title << " (" << stem << ")'\nplot ";
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (k) f << ", \\\n     ";
            f << "'" << csv << "' using 1:'" << cols[k] << "' with lines";
        }
        f << "\n";
    }
}

} // namespace selfsim
