#pragma once

#include <cmath>
#include <vector>

#include "liquidex/market.hpp"

namespace liquidex {

// x-advection differencing of the explicit step. Upwind (backward in x,
// matching the nonpositive advection velocity -upsilon) keeps the update
// monotone; central replicates the classic textbook form literally.
enum class Scheme { UpwindX, CentralX };

// Uniform discretization of (tau, x, z) with tau = T - t, z = log s.
struct GridSpec {
    int nTau = 0;
    int nX = 0;
    int nZ = 0;
    double dTau = 0.0;
    double dX = 0.0;
    double dZ = 0.0;
    double zMin = 0.0;
    double zMax = 0.0;
    double xMax = 0.0;
    double horizonT = 0.0;

    double x_of(int i) const { return dX * i; }
    double z_of(int j) const { return zMin + dZ * j; }
    double s_of(int j) const { return std::exp(z_of(j)); }
    double tau_of(int n) const { return dTau * n; }
    double t_of(int n) const { return horizonT - dTau * n; }
};

// Explicit-scheme time-step bound and central-z monotonicity check.
struct StabilityReport {
    double maxDTau = 0.0;           // largest dTau keeping every update coefficient >= 0
    int bindingRegime = 0;          // regime attaining the bound
    std::vector<bool> zMonotoneOk;  // per regime: dZ <= sigma^2 / |drift - sigma^2/2|
    bool dTauOk = false;
    bool pass = false;              // dTauOk and all zMonotoneOk

    bool z_all_ok() const {
        for (bool ok : zMonotoneOk)
            if (!ok) return false;
        return true;
    }
};

// Fixed cell counts in every dimension. Throws Error("DegenerateDomain")
// for an empty x/z/tau interval and Error("InvalidCounts") for counts < 2.
GridSpec build_grid(const ProblemSpec& spec, int nTau, int nX, int nZ);

// Derives nTau from the stability bound: dTau targets 0.9 x maxDTau and is
// rounded down so that nTau * dTau = T exactly. Throws
// Error("DegenerateDomain") when the bound is 0 (no stable explicit step).
GridSpec build_grid_auto_tau(const ProblemSpec& spec, int nX, int nZ, Scheme scheme);

// maxDTau = min over regimes of
//   1 / (beta + |q_ll| + sigma(l)^2/dZ^2 + [upsilonMax/dX if upwind-x]),
// the exact condition for a nonnegative diagonal coefficient. The z check
// covers the central z-difference: dZ <= sigma(l)^2 / |b(l)| with
// b = drift rate - sigma^2/2, vacuously true when b = 0; with permanent
// impact the worst-case drift over the control set is used.
StabilityReport check_stability(const GridSpec& grid, const ProblemSpec& spec, Scheme scheme);

}  // namespace liquidex
