// Command-line front end: solve / policy-slice / simulate / verify /
// convergence over a shared line-oriented configuration format. Exit codes:
// 0 success, 2 invalid config or input, 3 stability refusal, 4 oracle
// verification failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "liquidex/config.hpp"
#include "liquidex/csv.hpp"
#include "liquidex/oracles.hpp"
#include "liquidex/simulate.hpp"
#include "liquidex/solver.hpp"

using namespace liquidex;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitStability = 3;
constexpr int kExitVerification = 4;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::optional<RunConfig> load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "error: IoFailure: cannot read %s\n", path.c_str());
        return std::nullopt;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    Validated<RunConfig> parsed = parse_config(buffer.str());
    if (!parsed.ok()) {
        for (const Issue& issue : parsed.issues) {
            std::fprintf(stderr, "error: %s: %s\n", issue.code.c_str(), issue.detail.c_str());
        }
        return std::nullopt;
    }
    return parsed.get();
}

// Creates the output directory and drops the resolved config next to the
// artifacts so every run records exactly what it computed.
fs::path prepare_output(const RunConfig& config) {
    const fs::path dir(config.output.directory);
    fs::create_directories(dir);
    write_text_file((dir / "resolved.cfg").string(), echo_config(config));
    return dir;
}

int step_of(const GridSpec& grid, double t) {
    const long n = std::lround((grid.horizonT - t) / grid.dTau);
    return static_cast<int>(std::clamp<long>(n, 0, grid.nTau));
}

void print_grid_banner(const GridSpec& grid, const StabilityReport& stability) {
    std::printf("grid: n_x=%d n_z=%d n_tau=%d d_tau=%s (bound %s, binding regime %d)\n",
                grid.nX, grid.nZ, grid.nTau, fmt(grid.dTau).c_str(),
                fmt(stability.maxDTau).c_str(), stability.bindingRegime + 1);
}

SolveOptions solve_options(const RunConfig& config, int workers, bool force, bool storeFull,
                           bool storePolicy) {
    SolveOptions options;
    options.scheme = config.grid.scheme;
    options.workers = workers;
    options.forceUnstable = force;
    options.storeFullValues = storeFull;
    options.storePolicy = storePolicy;
    return options;
}

int cmd_solve(const RunConfig& config, int workers, bool force) {
    const GridSpec grid = make_grid(config);
    bool needFull = false;
    for (double t : config.output.slices) needFull |= step_of(grid, t) != grid.nTau;

    const SolveResult result =
        solve(config.problem, grid, solve_options(config, workers, force, needFull, true));
    print_grid_banner(grid, result.stability);

    const fs::path dir = prepare_output(config);
    for (double t : config.output.slices) {
        const int step = step_of(grid, t);
        const std::string label = fmt_label(t);
        const std::string valueName = "value_t" + label + ".csv";
        const std::string policyName = "policy_t" + label + ".csv";
        write_text_file((dir / valueName).string(), value_slice_csv(result.values, step));
        write_text_file((dir / policyName).string(),
                        policy_slice_csv(extract_policy_slice(result.policy, t)));
        std::printf("wrote %s, %s\n", (dir / valueName).string().c_str(),
                    (dir / policyName).string().c_str());
    }

    const double x0 = config.simulate.x0, s0 = config.simulate.s0;
    for (int l = 0; l < config.problem.regimes(); ++l) {
        std::printf("value t=0 x=%s s=%s regime %d: %s\n", fmt(x0).c_str(), fmt(s0).c_str(),
                    l + 1, fmt(value_at(result.values, 0.0, x0, s0, l)).c_str());
    }
    return kExitOk;
}

int cmd_policy_slice(const RunConfig& config, int workers, bool force, double t,
                     std::optional<double> sColumn) {
    const GridSpec grid = make_grid(config);
    const SolveResult result =
        solve(config.problem, grid, solve_options(config, workers, force, false, true));
    print_grid_banner(grid, result.stability);

    const double s =
        sColumn ? *sColumn : std::sqrt(config.problem.domain.sMin * config.problem.domain.sMax);
    if (s <= 0.0) {
        std::fprintf(stderr, "error: NonPositivePrice: --s must be positive\n");
        return kExitValidation;
    }
    const int j = static_cast<int>(
        std::clamp<long>(std::lround((std::log(s) - grid.zMin) / grid.dZ), 0, grid.nZ));
    const int step = step_of(grid, t);

    PolicySlice slice;
    slice.step = step;
    slice.tSnapped = grid.t_of(step);
    for (int l = 0; l < config.problem.regimes(); ++l) {
        for (int i = 0; i <= grid.nX; ++i) {
            slice.rows.push_back({l + 1, slice.tSnapped, grid.x_of(i), grid.s_of(j),
                                  result.policy.rate_at(step, i, j, l)});
        }
    }

    const fs::path dir = prepare_output(config);
    write_text_file((dir / "policy_slice.csv").string(), policy_slice_csv(slice));
    std::printf("wrote %s (t snapped to step %d, s column %s)\n",
                (dir / "policy_slice.csv").string().c_str(), step, fmt(grid.s_of(j)).c_str());

    for (int l = 0; l < config.problem.regimes(); ++l) {
        double firstActive = -1.0;
        for (int i = 0; i <= grid.nX; ++i) {
            if (result.policy.rate_at(step, i, j, l) > 0.0) {
                firstActive = grid.x_of(i);
                break;
            }
        }
        if (firstActive < 0.0) {
            std::printf("regime %d: never sells at this time\n", l + 1);
        } else {
            std::printf("regime %d: selling starts at x = %s\n", l + 1,
                        fmt(firstActive).c_str());
        }
    }
    return kExitOk;
}

int cmd_simulate(const RunConfig& config, int workers, bool force, bool writePaths,
                 const std::string& policyArg) {
    const GridSpec grid = make_grid(config);
    const bool wantOptimal = policyArg == "optimal";

    std::unique_ptr<Policy> policy;
    if (!wantOptimal) {
        const std::string prefix = "constant:";
        if (policyArg.rfind(prefix, 0) != 0) {
            std::fprintf(stderr,
                         "error: BadValue: --policy must be 'optimal' or 'constant:<rate>'\n");
            return kExitValidation;
        }
        char* end = nullptr;
        const std::string num = policyArg.substr(prefix.size());
        const double rate = std::strtod(num.c_str(), &end);
        if (num.empty() || end != num.c_str() + num.size() || !std::isfinite(rate) ||
            rate < 0.0) {
            std::fprintf(stderr, "error: BadValue: bad constant policy rate '%s'\n",
                         num.c_str());
            return kExitValidation;
        }
        policy = std::make_unique<ConstantPolicy>(rate);
    }

    const SolveResult result = solve(config.problem, grid,
                                     solve_options(config, workers, force, false, wantOptimal));
    print_grid_banner(grid, result.stability);
    if (wantOptimal) policy = std::make_unique<GridPolicy>(result.policy);

    const SimulateConfig& sim = config.simulate;
    const double dt = resolve_dt(config, grid);
    const int l0 = sim.regime0 - 1;
    const std::vector<PathOutcome> outcomes = run_paths(
        *policy, config.problem, sim.x0, sim.s0, l0, sim.nPaths, dt, sim.seed, workers);
    const PairedSimResult paired = summarize_paired(outcomes);

    std::printf("paths: %ld  dt: %s  seed: %llu  start: x=%s s=%s regime %d\n", sim.nPaths,
                fmt(dt).c_str(), static_cast<unsigned long long>(sim.seed), fmt(sim.x0).c_str(),
                fmt(sim.s0).c_str(), sim.regime0);
    std::printf("direct estimate:       mean %s  stderr %s\n", fmt(paired.direct.mean).c_str(),
                fmt(paired.direct.stdErr).c_str());
    std::printf("running-cost estimate: mean %s  stderr %s\n", fmt(paired.dynkin.mean).c_str(),
                fmt(paired.dynkin.stdErr).c_str());
    std::printf("paired difference:     mean %s  stderr %s\n", fmt(paired.diffMean).c_str(),
                fmt(paired.diffStdErr).c_str());
    std::printf("mean exit time: %s  exited early: %s\n", fmt(paired.direct.meanExitTime).c_str(),
                fmt(paired.direct.fractionExitedEarly).c_str());
    std::printf("grid value at start:   %s\n",
                fmt(value_at(result.values, 0.0, sim.x0, sim.s0, l0)).c_str());

    const fs::path dir = prepare_output(config);
    if (writePaths) {
        write_text_file((dir / "paths.csv").string(), paths_csv(outcomes, sim.seed));
        std::printf("wrote %s\n", (dir / "paths.csv").string().c_str());
    }
    return kExitOk;
}

int cmd_verify(const RunConfig& config, int workers, bool force) {
    const ProblemSpec& p = config.problem;
    const bool identityG = config.impact.g == "identity";
    const bool linearPhi = config.impact.phi == "linear";

    enum class OracleKind { HoldValue, CoupledOde };
    OracleKind kind;
    if (p.regimes() == 1 && linearPhi && identityG && p.model.mu[0] > p.beta) {
        kind = OracleKind::HoldValue;
    } else if (p.upsilonMax == 0.0 && identityG) {
        kind = OracleKind::CoupledOde;
    } else {
        std::fprintf(stderr,
                     "error: NoOracle: verify needs a config with an analytic ground truth: "
                     "either a single regime with linear phi, identity g and mu > beta "
                     "(hold-value), or upsilon_max = 0 with identity g (coupled-ODE)\n");
        return kExitValidation;
    }

    const GridSpec grid = make_grid(config);
    const SolveResult result =
        solve(config.problem, grid, solve_options(config, workers, force, false, false));
    print_grid_banner(grid, result.stability);

    std::vector<double> factors;
    if (kind == OracleKind::CoupledOde) {
        factors = coupled_ode_factors(0.0, p.generator, p.model.mu, p.beta, p.horizonT);
    }
    auto oracle = [&](double x, double s, int l) {
        if (kind == OracleKind::HoldValue) {
            return closed_form_hold_value(x, s, 0.0, p.model.mu[0], p.beta, p.horizonT);
        }
        return x * s * factors[static_cast<std::size_t>(l)];
    };

    // interior window: x in [0.1, 0.9] xMax, z one sixth of the span in
    // from either end (for the default domain that is s in [e^-0.5, e^1.5])
    const int iLo = static_cast<int>(std::ceil(0.1 * grid.nX - 1e-9));
    const int iHi = static_cast<int>(std::floor(0.9 * grid.nX + 1e-9));
    const double span = grid.zMax - grid.zMin;
    const int jLo = static_cast<int>(std::ceil(span / 6.0 / grid.dZ - 1e-9));
    const int jHi = grid.nZ - jLo;

    std::printf("oracle: %s\n", kind == OracleKind::HoldValue ? "hold-value" : "coupled-ode");
    std::printf("%-8s %-8s %-14s %-10s %s\n", "regime", "points", "max_rel_err", "tolerance",
                "status");
    const double tol = 0.01;
    bool allOk = true;
    for (int l = 0; l < p.regimes(); ++l) {
        double worst = 0.0;
        long points = 0;
        for (int i = std::max(iLo, 1); i <= iHi; ++i) {
            for (int j = jLo; j <= jHi; ++j) {
                const double truth = oracle(grid.x_of(i), grid.s_of(j), l);
                const double got = result.values.at(grid.nTau, i, j, l);
                worst = std::max(worst, std::abs(got - truth) / truth);
                ++points;
            }
        }
        const bool ok = worst <= tol;
        allOk = allOk && ok;
        std::printf("%-8d %-8ld %-14s %-10s %s\n", l + 1, points, fmt(worst).c_str(),
                    fmt(tol).c_str(), ok ? "ok" : "FAIL");
    }
    prepare_output(config);
    return allOk ? kExitOk : kExitVerification;
}

int cmd_convergence(const RunConfig& config, int workers, int levels) {
    const std::vector<ReferencePoint> points{{config.simulate.x0, config.simulate.s0}};
    const ConvergenceReport report =
        convergence_study(config.problem, config.grid.nX, config.grid.nZ, levels,
                          config.grid.scheme, points, workers);

    std::printf("%-6s %-6s %-6s %-7s %-24s %s\n", "level", "n_x", "n_z", "n_tau", "value", "gap");
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
        const ConvergenceLevel& level = report.levels[k];
        for (std::size_t l = 0; l < level.values[0].size(); ++l) {
            std::printf("%-6zu %-6d %-6d %-7d %-24s %s\n", k, level.nX, level.nZ, level.nTau,
                        fmt(level.values[0][l]).c_str(),
                        k > 0 ? fmt(report.gaps[k - 1][0][l]).c_str() : "-");
        }
    }

    const fs::path dir = prepare_output(config);
    write_text_file((dir / "convergence.csv").string(), convergence_csv(report, points));
    std::printf("wrote %s\n", (dir / "convergence.csv").string().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-horizon optimal liquidation under Markov regime switching: "
                 "explicit HJB grid solver, policy extraction, Monte Carlo validation"};
    app.require_subcommand(1);

    std::string configPath, outDir, policyArg = "optimal";
    int workers = 0, levels = 3;
    bool force = false, withPaths = false;
    double tSlice = 0.0, sColumn = 0.0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", configPath, "run configuration file")->required();
        cmd->add_option("--workers", workers, "worker threads (0 = auto / env override)");
        cmd->add_option("--output-dir", outDir, "override output.directory");
    };

    CLI::App* solveCmd =
        app.add_subcommand("solve", "march the value system; write value/policy tables");
    add_common(solveCmd);
    solveCmd->add_flag("--force", force, "march even when the stability check fails");

    CLI::App* sliceCmd = app.add_subcommand(
        "policy-slice", "tabulate the selling rate against holdings at a fixed time and price");
    add_common(sliceCmd);
    sliceCmd->add_flag("--force", force, "march even when the stability check fails");
    sliceCmd->add_option("--t", tSlice, "slice time (default 0)");
    CLI::Option* sOpt =
        sliceCmd->add_option("--s", sColumn, "price column (default: geometric midpoint)");

    CLI::App* simCmd = app.add_subcommand(
        "simulate", "Monte Carlo policy evaluation from the configured start point");
    add_common(simCmd);
    simCmd->add_flag("--force", force, "march even when the stability check fails");
    simCmd->add_flag("--paths", withPaths, "also write per-path outcomes");
    simCmd->add_option("--policy", policyArg, "optimal | constant:<rate> (default optimal)");

    CLI::App* verifyCmd = app.add_subcommand(
        "verify", "compare the solver against the analytic / ODE ground truths");
    add_common(verifyCmd);
    verifyCmd->add_flag("--force", force, "march even when the stability check fails");

    CLI::App* convCmd = app.add_subcommand(
        "convergence", "grid-refinement study at the configured start point");
    add_common(convCmd);
    convCmd->add_option("--levels", levels, "refinement levels (default 3, minimum 2)");

    CLI11_PARSE(app, argc, argv);

    try {
        std::optional<RunConfig> maybe = load_config(configPath);
        if (!maybe) return kExitValidation;
        RunConfig config = std::move(*maybe);
        if (!outDir.empty()) config.output.directory = outDir;

        if (solveCmd->parsed()) return cmd_solve(config, workers, force);
        if (sliceCmd->parsed()) {
            return cmd_policy_slice(config, workers, force, tSlice,
                                    sOpt->count() ? std::optional<double>(sColumn)
                                                  : std::nullopt);
        }
        if (simCmd->parsed()) return cmd_simulate(config, workers, force, withPaths, policyArg);
        if (verifyCmd->parsed()) return cmd_verify(config, workers, force);
        if (convCmd->parsed()) return cmd_convergence(config, workers, levels);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", e.code().c_str(), e.what());
        return e.code() == "StabilityRefused" ? kExitStability : kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
    return kExitOk;
}
