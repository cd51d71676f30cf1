#include "liquidex/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "liquidex/rng.hpp"

namespace liquidex {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// The reconstructed time T - n*dTau picks up one rounding ulp at tau = T;
// snap it so the t = 0 slice is labeled exactly 0.
double snap_time(double t, double horizon) {
    return std::abs(t) < 1e-12 * horizon ? 0.0 : t;
}

}  // namespace

std::string value_slice_csv(const ValueField& values, int step) {
    const GridSpec& grid = values.grid();
    const double t = snap_time(grid.t_of(step), grid.horizonT);
    std::string out = "regime,t,x,s,value\n";
    for (int l = 0; l < values.regimes(); ++l) {
        for (int i = 0; i <= grid.nX; ++i) {
            for (int j = 0; j <= grid.nZ; ++j) {
                out += std::to_string(l + 1) + ',' + fmt(t) + ',' + fmt(grid.x_of(i)) + ',' +
                       fmt(grid.s_of(j)) + ',' + fmt(values.at(step, i, j, l)) + '\n';
            }
        }
    }
    return out;
}

std::string policy_slice_csv(const PolicySlice& slice) {
    std::string out = "regime,t,x,s,control\n";
    for (const PolicySliceRow& row : slice.rows) {
        out += std::to_string(row.regime) + ',' + fmt(row.t) + ',' + fmt(row.x) + ',' +
               fmt(row.s) + ',' + fmt(row.upsilon) + '\n';
    }
    return out;
}

std::string paths_csv(const std::vector<PathOutcome>& outcomes, std::uint64_t seed) {
    std::string out = "path,seed,J,Jdynkin,exit_time,exited_early\n";
    for (std::size_t p = 0; p < outcomes.size(); ++p) {
        const PathOutcome& o = outcomes[p];
        out += std::to_string(p) + ',' + std::to_string(mix_seed(seed, p)) + ',' +
               fmt(o.payoff) + ',' + fmt(o.payoffDynkin) + ',' + fmt(o.exitTime) + ',' +
               (o.exitedEarly ? '1' : '0') + '\n';
    }
    return out;
}

std::string convergence_csv(const ConvergenceReport& report,
                            const std::vector<ReferencePoint>& points) {
    std::string out = "level,n_x,n_z,n_tau,d_tau,x,s,regime,value,gap\n";
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
        const ConvergenceLevel& level = report.levels[k];
        for (std::size_t p = 0; p < points.size(); ++p) {
            for (std::size_t l = 0; l < level.values[p].size(); ++l) {
                out += std::to_string(k) + ',' + std::to_string(level.nX) + ',' +
                       std::to_string(level.nZ) + ',' + std::to_string(level.nTau) + ',' +
                       fmt(level.dTau) + ',' + fmt(points[p].x) + ',' + fmt(points[p].s) + ',' +
                       std::to_string(l + 1) + ',' + fmt(level.values[p][l]) + ',';
                if (k > 0) out += fmt(report.gaps[k - 1][p][l]);
                out += '\n';
            }
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("IoFailure", "cannot open " + path + " for writing");
    file << contents;
    file.flush();
    if (!file) throw Error("IoFailure", "write to " + path + " failed");
}

}  // namespace liquidex
