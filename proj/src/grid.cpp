#include "liquidex/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace liquidex {

namespace {

GridSpec make_grid(const ProblemSpec& spec, int nTau, int nX, int nZ) {
    if (nTau < 2 || nX < 2 || nZ < 2) {
        throw Error("InvalidCounts", "need at least 2 cells per dimension");
    }
    GridSpec grid;
    grid.nTau = nTau;
    grid.nX = nX;
    grid.nZ = nZ;
    grid.horizonT = spec.horizonT;
    grid.xMax = spec.domain.xMax;
    grid.zMin = std::log(spec.domain.sMin);
    grid.zMax = std::log(spec.domain.sMax);
    if (!(grid.horizonT > 0.0) || !(grid.xMax > 0.0) || !(grid.zMax > grid.zMin)) {
        throw Error("DegenerateDomain", "tau, x and z intervals must have positive width");
    }
    grid.dTau = grid.horizonT / nTau;
    grid.dX = grid.xMax / nX;
    grid.dZ = (grid.zMax - grid.zMin) / nZ;
    return grid;
}

}  // namespace

GridSpec build_grid(const ProblemSpec& spec, int nTau, int nX, int nZ) {
    return make_grid(spec, nTau, nX, nZ);
}

GridSpec build_grid_auto_tau(const ProblemSpec& spec, int nX, int nZ, Scheme scheme) {
    // provisional grid fixes dX/dZ; nTau only rescales dTau
    GridSpec probe = make_grid(spec, 2, nX, nZ);
    const StabilityReport report = check_stability(probe, spec, scheme);
    if (!(report.maxDTau > 0.0)) {
        throw Error("DegenerateDomain", "stability bound leaves no admissible time step");
    }
    int nTau = 2;
    if (std::isfinite(report.maxDTau)) {
        const double target = 0.9 * report.maxDTau;
        nTau = std::max(2, static_cast<int>(std::ceil(spec.horizonT / target)));
    }
    return make_grid(spec, nTau, nX, nZ);
}

StabilityReport check_stability(const GridSpec& grid, const ProblemSpec& spec, Scheme scheme) {
    StabilityReport report;
    report.maxDTau = std::numeric_limits<double>::infinity();
    report.bindingRegime = 0;
    const int m = spec.regimes();
    report.zMonotoneOk.assign(static_cast<std::size_t>(m), true);

    for (int l = 0; l < m; ++l) {
        const double sigma2 = spec.model.sigma[static_cast<std::size_t>(l)] *
                              spec.model.sigma[static_cast<std::size_t>(l)];
        double denom = spec.beta + spec.generator.exit_rate(l) + sigma2 / (grid.dZ * grid.dZ);
        if (scheme == Scheme::UpwindX) denom += spec.upsilonMax / grid.dX;
        const double bound =
            denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
        if (bound < report.maxDTau) {
            report.maxDTau = bound;
            report.bindingRegime = l;
        }

        // worst-case z-drift magnitude over the control set (lambda may pull
        // the drift through zero, so check both endpoints)
        const double b0 = spec.model.drift_rate(l, 0.0) - 0.5 * sigma2;
        const double b1 = spec.model.drift_rate(l, spec.upsilonMax) - 0.5 * sigma2;
        const double b = std::max(std::abs(b0), std::abs(b1));
        if (b > 0.0) {
            report.zMonotoneOk[static_cast<std::size_t>(l)] = grid.dZ <= sigma2 / b;
        }
    }

    report.dTauOk = grid.dTau <= report.maxDTau * (1.0 + 1e-12);
    report.pass = report.dTauOk && report.z_all_ok();
    return report;
}

}  // namespace liquidex
