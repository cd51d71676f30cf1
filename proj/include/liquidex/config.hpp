#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liquidex/grid.hpp"
#include "liquidex/market.hpp"

namespace liquidex {

// Grid block of a run configuration. nTau = 0 means "auto": derive the step
// count from the stability bound (0.9 safety factor).
struct GridConfig {
    int nX = 100;
    int nZ = 60;
    int nTau = 0;
    Scheme scheme = Scheme::UpwindX;
};

// Monte Carlo block. dt = 0 means "auto": a quarter of the grid time step.
// x0/s0 default to the middle of the domain (arithmetic in x, geometric
// in s) when the keys are absent. regime0 is 1-based like all reporting.
struct SimulateConfig {
    long nPaths = 10000;
    double dt = 0.0;
    std::uint64_t seed = 12345;
    double x0 = 0.0;
    double s0 = 0.0;
    int regime0 = 1;
};

struct OutputConfig {
    std::string directory;
    std::vector<double> slices;  // times t whose value/policy tables are written
};

// Which [impact] families the file picked, kept verbatim so the resolved
// config can be echoed and re-parsed identically.
struct ImpactConfig {
    std::string phi = "linear";  // linear | exponential | tabulated
    double alpha = 0.0;
    std::vector<double> phiRates;
    std::vector<double> phiValues;
    std::string g = "identity";  // identity | builtin | piecewise
    std::vector<double> gBreakpoints;
    std::vector<std::vector<double>> gCoefficients;
};

struct RunConfig {
    ProblemSpec problem;
    ImpactConfig impact;
    GridConfig grid;
    SimulateConfig simulate;
    OutputConfig output;
};

// Strict line-oriented parser for the `section.key = value` format. Lists
// are comma-separated; '#' starts a comment; keys outside the schema are
// UnknownKey errors and required keys without defaults are MissingKey
// errors. Every physical constraint is re-checked through the model-layer
// validators, so their issue codes surface here unchanged.
Validated<RunConfig> parse_config(const std::string& text);

// Canonical text form of a resolved config: every key explicit (defaults
// filled in), numbers at 17 significant digits, "auto" sentinels kept.
// parse_config(echo_config(c)) reproduces c exactly.
std::string echo_config(const RunConfig& config);

// Grid construction honoring the auto-nTau sentinel.
GridSpec make_grid(const RunConfig& config);

// Simulation step honoring the auto-dt sentinel (dTau / 4).
double resolve_dt(const RunConfig& config, const GridSpec& grid);

}  // namespace liquidex
