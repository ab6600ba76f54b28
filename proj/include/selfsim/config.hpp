#pragma once

#include "selfsim/constitutive.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/riemann_solver.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace selfsim {

/// Everything a CLI run needs; config files and flags both land here.
struct RunConfig {
    std::string law = "linear";
    double c0 = 2.0;
    std::string table; ///< CSV of (w, sigma) for law = tabulated

    RiemannData data{0.0, 0.0, 0.0, 1.0};
    double w_b = 1.0;
    SolverConfig solver;
    double delta = 0.0; ///< excision half-width; 0 keeps the full line

    std::vector<double> eps_list{0.08, 0.04, 0.02, 0.01};
    double r0 = 0.1;
    int jobs = 1;

    double t_final = 2.0;
    double cfl = 0.4;
    double X = 12.0;
    double h = 0.01;

    std::string out_dir = ".";
    bool dump_measures = false;
};

class ConfigError : public SolverError {
public:
    ConfigError(const std::string& file, std::size_t line, const std::string& msg)
        : SolverError(ErrorCode::config_error,
                      file + (line ? ":" + std::to_string(line) : std::string()) + ": " + msg),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw SolverError(ErrorCode::config_error, "bad number '" + item + "' in list '" + text + "'");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size())
            throw SolverError(ErrorCode::config_error, "bad number '" + item + "' in list '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw SolverError(ErrorCode::config_error, "empty list");
    return out;
}

namespace detail {

// Line of "key" inside "[section]" for diagnostics; 0 if not found.
inline std::size_t locate(const std::string& text, const std::string& section, const std::string& key) {
    std::istringstream in(text);
    std::string line, current;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        const auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line[b] == ';' || line[b] == '#') continue;
        if (line[b] == '[') {
            const auto e = line.find(']', b);
            current = line.substr(b + 1, e == std::string::npos ? std::string::npos : e - b - 1);
            if (key.empty() && current == section) return no;
            continue;
        }
        const auto eq = line.find('=');
        std::string k = line.substr(b, eq == std::string::npos ? std::string::npos : eq - b);
        while (!k.empty() && std::isspace(static_cast<unsigned char>(k.back()))) k.pop_back();
        if (current == section && k == key) return no;
    }
    return 0;
}

} // namespace detail

/// Reads an INI file with sections [law], [solver], [sweep], [output] into cfg.
/// Keys mirror the CLI flags (e.g. max-iter, out-dir). Errors carry the line.
inline void load_config(const std::string& path, RunConfig& cfg) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path, 0, "cannot open config file");
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    boost::property_tree::ptree tree;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(path, e.line(), e.message());
    }

    using Setter = std::function<void(const std::string&)>;
    auto num = [](double& dst) -> Setter {
        return [&dst](const std::string& s) {
            std::size_t used = 0;
            dst = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument("trailing characters");
        };
    };
    auto integer = [](auto& dst) -> Setter {
        return [&dst](const std::string& s) {
            std::size_t used = 0;
            const long long v = std::stoll(s, &used);
            if (used != s.size() || v < 0) throw std::invalid_argument("expected a non-negative integer");
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(v);
        };
    };
    auto str = [](std::string& dst) -> Setter { return [&dst](const std::string& s) { dst = s; }; };
    auto flag = [](bool& dst) -> Setter {
        return [&dst](const std::string& s) {
            if (s == "true" || s == "1" || s == "yes" || s == "on") dst = true;
            else if (s == "false" || s == "0" || s == "no" || s == "off") dst = false;
            else throw std::invalid_argument("expected a boolean");
        };
    };
    SolverConfig& sc = cfg.solver;
    const std::map<std::string, std::map<std::string, Setter>> keys = {
        {"law", {{"law", str(cfg.law)}, {"name", str(cfg.law)}, {"c0", num(cfg.c0)}, {"table", str(cfg.table)}}},
        {"solver",
         {{"vl", num(cfg.data.v_l)},
          {"wl", num(cfg.data.w_l)},
          {"vr", num(cfg.data.v_r)},
          {"wr", num(cfg.data.w_r)},
          {"wb", num(cfg.w_b)},
          {"eps", num(sc.eps)},
          {"gamma", num(sc.gamma)},
          {"delta", num(cfg.delta)},
          {"L", num(sc.L)},
          {"grid", integer(sc.n_nodes)},
          {"tol", num(sc.tol)},
          {"max-iter", integer(sc.max_iter)},
          {"damping", num(sc.damping)},
          {"t-final", num(cfg.t_final)},
          {"cfl", num(cfg.cfl)},
          {"X", num(cfg.X)},
          {"dx", num(cfg.h)}}},
        {"sweep",
         {{"eps", [&cfg](const std::string& s) { cfg.eps_list = parse_list(s); }},
          {"r0", num(cfg.r0)},
          {"jobs", integer(cfg.jobs)}}},
        {"output", {{"out-dir", str(cfg.out_dir)}, {"dump-measures", flag(cfg.dump_measures)}}},
    };
    for (const auto& [section, body] : tree) {
        const auto sk = keys.find(section);
        if (sk == keys.end() && body.empty())
            throw ConfigError(path, detail::locate(text, "", section), "key '" + section + "' outside any section");
        if (sk == keys.end())
            throw ConfigError(path, detail::locate(text, section, ""), "unknown section [" + section + "]");
        for (const auto& [key, node] : body) {
            const std::size_t line = detail::locate(text, section, key);
            const auto it = sk->second.find(key);
            if (it == sk->second.end()) throw ConfigError(path, line, "unknown key '" + key + "' in [" + section + "]");
            try {
                it->second(node.data());
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                throw ConfigError(path, line, "bad value '" + node.data() + "' for " + key + ": " + e.what());
            }
        }
    }
}

inline StressLaw make_law(const RunConfig& cfg) {
    if (cfg.law == "linear") return StressLaw::linear(cfg.c0);
    if (cfg.law == "hardening") return StressLaw::hardening();
    if (cfg.law == "cubic") return StressLaw::cubic();
    if (cfg.law == "tabulated") {
        std::ifstream f(cfg.table);
        if (!f) throw SolverError(ErrorCode::config_error, "cannot open table '" + cfg.table + "'");
        std::vector<double> w, s;
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
            const auto v = parse_list(line);
            if (v.size() != 2) throw SolverError(ErrorCode::config_error, "table rows need two columns: w,sigma");
            w.push_back(v[0]);
            s.push_back(v[1]);
        }
        return StressLaw::tabulated(w, s);
    }
    throw SolverError(ErrorCode::config_error, "unknown law '" + cfg.law + "' (linear, hardening, cubic, tabulated)");
}

} // namespace selfsim
