#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// LIQUIDEX_CLI_PATH and LIQUIDEX_CONFIG_DIR are injected by the build.

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exitCode = -1;
    std::string output;  // stdout + stderr combined
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LIQUIDEX_CLI_PATH) + " " + args + " 2>&1";
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) res.output.append(buf, n);
    const int status = pclose(pipe);
    res.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("liquidex_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// Small config that solves in well under a second.
std::string fast_config(const std::string& outDir) {
    return "model.regimes = 2\n"
           "model.mu = 0.3, -0.1\n"
           "model.sigma = 0.2, 0.4\n"
           "model.generator = -0.5, 0.5, 1, -1\n"
           "model.lambda = 0\n"
           "impact.phi = exponential\n"
           "impact.alpha = 0.005\n"
           "impact.g = builtin\n"
           "problem.beta = 0.01\n"
           "problem.t = 1\n"
           "problem.upsilon_max = 100\n"
           "problem.control_quantum = 1\n"
           "problem.x_max = 100\n"
           "problem.s_min = 0.36787944117144233\n"
           "problem.s_max = 7.3890560989306504\n"
           "grid.n_x = 20\n"
           "grid.n_z = 24\n"
           "simulate.n_paths = 400\n"
           "simulate.seed = 4242\n"
           "output.directory = " +
           outDir +
           "\n"
           "output.slices = 0, 1\n";
}

std::string oracle_a_path() { return std::string(LIQUIDEX_CONFIG_DIR) + "/oracleA.cfg"; }
std::string oracle_b_path() { return std::string(LIQUIDEX_CONFIG_DIR) + "/oracleB.cfg"; }
std::string default_path() { return std::string(LIQUIDEX_CONFIG_DIR) + "/default.cfg"; }

}  // namespace

TEST_CASE("solve writes the requested slices and the resolved configuration") {
    const fs::path dir = fresh_dir("solve");
    const fs::path cfg = dir / "run.cfg";
    write_file(cfg, fast_config((dir / "out").string()));

    const RunResult res = run_cli("solve --config " + cfg.string());
    CHECK(res.exitCode == 0);
    CHECK(res.output.find("value t=0") != std::string::npos);
    CHECK(res.output.find("regime 1:") != std::string::npos);
    CHECK(res.output.find("regime 2:") != std::string::npos);

    CHECK(fs::exists(dir / "out" / "resolved.cfg"));
    CHECK(fs::exists(dir / "out" / "value_t0.csv"));
    CHECK(fs::exists(dir / "out" / "policy_t0.csv"));
    CHECK(fs::exists(dir / "out" / "value_t1.csv"));

    const std::string values = read_file(dir / "out" / "value_t0.csv");
    CHECK(values.rfind("regime,t,x,s,value\n", 0) == 0);
    // header + 2 regimes * 21 x-nodes * 25 z-nodes
    CHECK(count_lines(values) == 1 + 2 * 21 * 25);

    const std::string policy = read_file(dir / "out" / "policy_t0.csv");
    CHECK(policy.rfind("regime,t,x,s,control\n", 0) == 0);
}

TEST_CASE("repeated runs produce byte-identical artifacts") {
    const fs::path dirA = fresh_dir("det_a");
    const fs::path dirB = fresh_dir("det_b");
    write_file(dirA / "run.cfg", fast_config((dirA / "out").string()));
    write_file(dirB / "run.cfg", fast_config((dirB / "out").string()));

    CHECK(run_cli("solve --config " + (dirA / "run.cfg").string()).exitCode == 0);
    CHECK(run_cli("solve --config " + (dirB / "run.cfg").string() + " --workers 3").exitCode ==
          0);

    CHECK(read_file(dirA / "out" / "value_t0.csv") == read_file(dirB / "out" / "value_t0.csv"));
    CHECK(read_file(dirA / "out" / "policy_t0.csv") ==
          read_file(dirB / "out" / "policy_t0.csv"));
}

TEST_CASE("the resolved configuration is itself a runnable config") {
    const fs::path dir = fresh_dir("roundtrip");
    write_file(dir / "run.cfg", fast_config((dir / "out").string()));
    REQUIRE(run_cli("solve --config " + (dir / "run.cfg").string()).exitCode == 0);

    // re-point the echoed config at a second directory and run it
    std::string echoed = read_file(dir / "out" / "resolved.cfg");
    const std::string from = "output.directory = " + (dir / "out").string();
    const std::size_t pos = echoed.find(from);
    REQUIRE(pos != std::string::npos);
    echoed.replace(pos, from.size(), "output.directory = " + (dir / "out2").string());
    write_file(dir / "rerun.cfg", echoed);

    CHECK(run_cli("solve --config " + (dir / "rerun.cfg").string()).exitCode == 0);
    CHECK(read_file(dir / "out" / "value_t0.csv") == read_file(dir / "out2" / "value_t0.csv"));
}

TEST_CASE("validation failures exit with code 2 and name the offending key") {
    const fs::path dir = fresh_dir("badkey");
    write_file(dir / "run.cfg", fast_config((dir / "out").string()) + "model.gamma = 1\n");
    const RunResult res = run_cli("solve --config " + (dir / "run.cfg").string());
    CHECK(res.exitCode == 2);
    CHECK(res.output.find("UnknownKey") != std::string::npos);
    CHECK(res.output.find("model.gamma") != std::string::npos);

    const RunResult missing = run_cli("solve --config " + (dir / "nope.cfg").string());
    CHECK(missing.exitCode == 2);
}

TEST_CASE("an unstable pinned time grid refuses to march unless forced") {
    const fs::path dir = fresh_dir("stab");
    write_file(dir / "run.cfg",
               fast_config((dir / "out").string()) + "grid.n_tau = 4\n");

    const RunResult refused = run_cli("solve --config " + (dir / "run.cfg").string());
    CHECK(refused.exitCode == 3);
    CHECK(refused.output.find("StabilityRefused") != std::string::npos);

    const RunResult forced =
        run_cli("solve --config " + (dir / "run.cfg").string() + " --force");
    CHECK(forced.exitCode == 0);
}

TEST_CASE("policy-slice reports where selling starts and honors --s") {
    const fs::path dir = fresh_dir("slice");
    write_file(dir / "run.cfg", fast_config((dir / "out").string()));

    const RunResult res = run_cli("policy-slice --config " + (dir / "run.cfg").string());
    CHECK(res.exitCode == 0);
    CHECK(res.output.find("regime 1") != std::string::npos);
    CHECK(res.output.find("regime 2") != std::string::npos);

    const std::string slice = read_file(dir / "out" / "policy_slice.csv");
    CHECK(slice.rfind("regime,t,x,s,control\n", 0) == 0);
    CHECK(count_lines(slice) == 1 + 2 * 21);

    // an explicit price picks the nearest grid column
    const RunResult at =
        run_cli("policy-slice --config " + (dir / "run.cfg").string() + " --s 2.0");
    CHECK(at.exitCode == 0);
    const std::string sliceAt = read_file(dir / "out" / "policy_slice.csv");
    CHECK(sliceAt != slice);
}

TEST_CASE("simulate prints both estimators and can dump per-path rows") {
    const fs::path dir = fresh_dir("sim");
    write_file(dir / "run.cfg", fast_config((dir / "out").string()));

    const RunResult res =
        run_cli("simulate --config " + (dir / "run.cfg").string() + " --paths");
    CHECK(res.exitCode == 0);
    CHECK(res.output.find("direct") != std::string::npos);
    CHECK(res.output.find("running-cost") != std::string::npos);

    const std::string paths = read_file(dir / "out" / "paths.csv");
    CHECK(paths.rfind("path,seed,J,Jdynkin,exit_time,exited_early\n", 0) == 0);
    CHECK(count_lines(paths) == 1 + 400);
}

TEST_CASE("simulate accepts constant policies and rejects malformed ones") {
    const fs::path dir = fresh_dir("simpol");
    write_file(dir / "run.cfg", fast_config((dir / "out").string()));

    CHECK(run_cli("simulate --config " + (dir / "run.cfg").string() +
                  " --policy constant:10")
              .exitCode == 0);
    CHECK(run_cli("simulate --config " + (dir / "run.cfg").string() + " --policy sideways")
              .exitCode == 2);
}

TEST_CASE("verify accepts the shipped oracle configs") {
    const fs::path dirA = fresh_dir("ver_a");
    const RunResult resA = run_cli("verify --config " + oracle_a_path() + " --output-dir " +
                                   (dirA / "out").string());
    CHECK(resA.exitCode == 0);
    CHECK(resA.output.find("max_rel_err") != std::string::npos);
    CHECK(resA.output.find("ok") != std::string::npos);

    const fs::path dirB = fresh_dir("ver_b");
    const RunResult resB = run_cli("verify --config " + oracle_b_path() + " --output-dir " +
                                   (dirB / "out").string());
    CHECK(resB.exitCode == 0);
}

TEST_CASE("verify declines configurations without a closed-form benchmark") {
    const fs::path dir = fresh_dir("ver_none");
    const RunResult res = run_cli("verify --config " + default_path() + " --output-dir " +
                                  (dir / "out").string());
    CHECK(res.exitCode == 2);
    CHECK(res.output.find("NoOracle") != std::string::npos);
}

TEST_CASE("verify exits 4 when a forced unstable march corrupts the answer") {
    const fs::path dir = fresh_dir("ver_bad");
    std::string text = read_file(oracle_b_path());
    const std::string tauFrom = "grid.n_tau = auto";
    const std::size_t tauPos = text.find(tauFrom);
    REQUIRE(tauPos != std::string::npos);
    text.replace(tauPos, tauFrom.size(), "grid.n_tau = 4");
    const std::string from = "output.directory = out-oracle-coupled";
    const std::size_t pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, from.size(), "output.directory = " + (dir / "out").string());
    write_file(dir / "run.cfg", text);

    const RunResult res =
        run_cli("verify --config " + (dir / "run.cfg").string() + " --force");
    CHECK(res.exitCode == 4);
}

TEST_CASE("convergence writes one row per refinement level") {
    const fs::path dir = fresh_dir("conv");
    write_file(dir / "run.cfg", fast_config((dir / "out").string()));

    const RunResult res =
        run_cli("convergence --config " + (dir / "run.cfg").string() + " --levels 2");
    CHECK(res.exitCode == 0);

    const std::string table = read_file(dir / "out" / "convergence.csv");
    CHECK(table.rfind("level,n_x,n_z,n_tau,d_tau,x,s,regime,value,gap\n", 0) == 0);
    // 2 levels * 2 regimes at the single reference point
    CHECK(count_lines(table) == 1 + 2 * 2);
}
