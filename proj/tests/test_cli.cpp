#include "selfsim/config.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace selfsim;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("selfsim_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(SELFSIM_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

} // namespace

TEST(Cli, CheckSucceeds) {
    const fs::path dir = scratch("check");
    EXPECT_EQ(run("check", dir / "log"), 0) << slurp(dir / "log");
    EXPECT_NE(slurp(dir / "log").find("all checks passed"), std::string::npos);
}

TEST(Cli, SolveWritesProfileAndSummary) {
    const fs::path dir = scratch("solve");
    const int rc = run("solve --law linear --c0 2 --vl 0 --wl 0 --vr 0 --wr 1 --eps 0.05 --grid 801 --dump-measures --out-dir " +
                           dir.string(),
                       dir / "log");
    ASSERT_EQ(rc, 0) << slurp(dir / "log");
    for (const char* f : {"profile.csv", "summary.json", "plot.gp", "phi_minus.csv", "phi_plus.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_NEAR(j.at("w_star").get<double>(), 0.5, 1e-9);
    EXPECT_TRUE(j.at("converged").get<bool>());
    EXPECT_EQ(slurp(dir / "profile.csv").substr(0, 22), "y,w,v,phi_minus,phi_pl");
}

TEST(Cli, ConfigFileDrivesTheRunAndFlagsOverride) {
    const fs::path dir = scratch("config");
    write(dir / "run.ini", "[law]\nlaw = hardening\n[solver]\nvl = 0.3\nwl = -0.5\nvr = -0.2\nwr = 0.4\neps = 0.05\ngrid = 801\n"
                           "[output]\nout-dir = " + dir.string() + "\n");
    ASSERT_EQ(run("solve --config " + (dir / "run.ini").string() + " --wr 0.5", dir / "log"), 0) << slurp(dir / "log");
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(j.at("config").at("law").at("law").get<std::string>(), "hardening");
    EXPECT_DOUBLE_EQ(j.at("config").at("solver").at("wr").get<double>(), 0.5);
}

TEST(Cli, BadConfigExitsWithTwoAndNamesTheLine) {
    const fs::path dir = scratch("badconfig");
    write(dir / "bad.ini", "[law]\nlaw = linear\n\n[solver]\neps = 0.02\nbogus = 3\n");
    EXPECT_EQ(run("solve --config " + (dir / "bad.ini").string(), dir / "log"), 2);
    EXPECT_NE(slurp(dir / "log").find("bad.ini:6"), std::string::npos) << slurp(dir / "log");
}

TEST(Cli, UnknownFlagExitsWithTwo) {
    const fs::path dir = scratch("flag");
    EXPECT_EQ(run("solve --no-such-flag 1", dir / "log"), 2);
}

TEST(Cli, SolverFailureExitsWithOne) {
    const fs::path dir = scratch("fail");
    const int rc = run("solve --law hardening --vl 0.3 --wl -0.5 --vr -0.2 --wr 0.4 --eps 0.02 --max-iter 1 --out-dir " +
                           dir.string(),
                       dir / "log");
    EXPECT_EQ(rc, 1);
    EXPECT_NE(slurp(dir / "log").find("not_converged"), std::string::npos) << slurp(dir / "log");
}

TEST(Cli, EigenWritesJson) {
    const fs::path dir = scratch("eigen");
    ASSERT_EQ(run("eigen --A '0,1;u1,0' --u 2,0 --y 0.3 --out-dir " + dir.string(), dir / "log"), 0) << slurp(dir / "log");
    const auto j = nlohmann::json::parse(slurp(dir / "eigen.json"));
    EXPECT_EQ(j.at("eigen").at("mu").size(), 2u);
}

TEST(ConfigParser, ReadsAllSections) {
    const fs::path dir = scratch("parser");
    write(dir / "ok.ini", "; comment\n[law]\nlaw = cubic\n[solver]\neps = 0.03\ngamma = 0.1\ngrid = 1001\n"
                          "[sweep]\neps = 0.08, 0.04\njobs = 2\n[output]\ndump-measures = yes\n");
    RunConfig c;
    load_config((dir / "ok.ini").string(), c);
    EXPECT_EQ(c.law, "cubic");
    EXPECT_DOUBLE_EQ(c.solver.eps, 0.03);
    EXPECT_DOUBLE_EQ(c.solver.gamma, 0.1);
    EXPECT_EQ(c.solver.n_nodes, 1001u);
    EXPECT_EQ(c.eps_list, (std::vector<double>{0.08, 0.04}));
    EXPECT_EQ(c.jobs, 2);
    EXPECT_TRUE(c.dump_measures);
}

TEST(ConfigParser, ErrorsCarryLineNumbers) {
    const fs::path dir = scratch("parser_err");
    const std::vector<std::pair<std::string, std::size_t>> cases = {
        {"[law]\nlaw = linear\n[solver]\neps = abc\n", 4},
        {"[law]\nc0 = 1\n[nonsense]\nx = 1\n", 3},
        {"stray = 1\n[law]\n", 1},
    };
    for (const auto& [text, line] : cases) {
        write(dir / "e.ini", text);
        RunConfig c;
        try {
            load_config((dir / "e.ini").string(), c);
            ADD_FAILURE() << text;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.line(), line) << text << e.what();
            EXPECT_EQ(e.code(), ErrorCode::config_error);
        }
    }
}
