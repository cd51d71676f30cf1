#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liquidex/grid.hpp"
#include "liquidex/hamiltonian.hpp"
#include "liquidex/market.hpp"

namespace liquidex {

// Transformed value surface W(tau, x, z, regime) = V(t, x, s, regime).
// Slices are laid out with z fastest: ((l*(nX+1) + i)*(nZ+1) + j).
// Either every tau-slice is stored (CSV export, property tests) or only the
// final one (production marches keep two rolling slices).
class ValueField {
public:
    ValueField(GridSpec grid, int regimes, bool storeFull);

    const GridSpec& grid() const noexcept { return grid_; }
    int regimes() const noexcept { return regimes_; }
    bool store_full() const noexcept { return storeFull_; }
    std::size_t slice_size() const noexcept { return sliceSize_; }

    bool has_slice(int n) const noexcept { return storeFull_ || n == grid_.nTau; }
    double* slice(int n);
    const double* slice(int n) const;

    double at(int n, int i, int j, int l) const;

private:
    GridSpec grid_;
    int regimes_ = 0;
    bool storeFull_ = false;
    std::size_t sliceSize_ = 0;
    std::vector<double> data_;
};

// Recorded argmax controls, stored as indices into the control set for the
// whole march. Slice n holds the controls applied at t = T - n*dTau; slice 0
// (the terminal instant, where only the block sale happens) is all zeros.
class PolicyField {
public:
    PolicyField() = default;
    PolicyField(GridSpec grid, int regimes, std::vector<double> controlValues);

    const GridSpec& grid() const noexcept { return grid_; }
    int regimes() const noexcept { return regimes_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t slice_size() const noexcept { return sliceSize_; }
    const std::vector<double>& control_values() const noexcept { return controlValues_; }

    std::uint16_t* slice(int n);
    const std::uint16_t* slice(int n) const;

    std::uint16_t index_at(int n, int i, int j, int l) const;
    double rate_at(int n, int i, int j, int l) const;

private:
    GridSpec grid_;
    int regimes_ = 0;
    std::size_t sliceSize_ = 0;
    std::vector<double> controlValues_;
    std::vector<std::uint16_t> data_;
};

// Terminal data W(0, x, z, l) = g(x) e^z, one full slice.
std::vector<double> init_terminal(const GridSpec& grid, const ImpactSpec& impact, int regimes);

// One explicit time step of the transformed system. Precomputes the
// per-regime stencil coefficients; apply() maps slice n to slice n+1 and
// records the argmax control of every point.
class Stepper {
public:
    struct Coefficients {
        double diag = 0.0;            // weight of W^n_{i,j}(l)
        double zPlus = 0.0;           // weight of W^n_{i,j+1}(l)
        double zMinus = 0.0;          // weight of W^n_{i,j-1}(l)
        std::vector<double> couple;   // weight of W^n_{i,j}(l'), 0 for l'=l
    };

    Stepper(const ProblemSpec& spec, const GridSpec& grid, Scheme scheme, int workers = 0);

    // prev and next are full slices (never aliased); policyOut may be null.
    // Throws Error("NonFiniteValue") naming the first offending point.
    void apply(const double* prev, double* next, std::uint16_t* policyOut) const;

    const ControlSet& controls() const noexcept { return controls_; }
    Coefficients coefficients(int regime) const;

private:
    GridSpec grid_;
    Scheme scheme_;
    int regimes_ = 0;
    int workers_ = 1;
    double lambda_ = 0.0;
    ControlSet controls_;
    std::vector<Coefficients> coeffs_;       // per regime
    std::vector<double> phiS_;               // [j][k]: phi(u_k) * e^{z_j}
    std::vector<double> dPhiS_;              // [j][k]: (phi(u_{k+1}) - phi(u_k)) * e^{z_j}
    std::vector<double> expZ_;               // e^{z_j}
    double ghostDown_ = 0.0, ghostUp_ = 0.0; // e^{-dZ}, e^{+dZ}
};

struct SolveOptions {
    Scheme scheme = Scheme::UpwindX;
    bool storeFullValues = false;
    bool storePolicy = true;
    bool forceUnstable = false;  // march even when the stability report fails
    int workers = 0;             // 0 = resolve from environment/hardware
};

struct SolveResult {
    ValueField values;
    PolicyField policy;
    StabilityReport stability;
};

// Full march n = 0..nTau. Throws Error("StabilityRefused") when the
// stability report fails and forceUnstable is not set; propagates
// NonFiniteValue from the stepper.
SolveResult solve(const ProblemSpec& spec, const GridSpec& grid, const SolveOptions& options = {});

// V(t, x, s, l): snaps t to the nearest stored tau-slice, then interpolates
// bilinearly in (x, z). Exact at grid points.
double value_at(const ValueField& field, double t, double x, double s, int l);

// Nearest-slice policy table at a fixed time, ordered (regime, x, z).
// Regimes are reported 1-based.
struct PolicySliceRow {
    int regime = 1;
    double t = 0.0;
    double x = 0.0;
    double s = 0.0;
    double upsilon = 0.0;
};

struct PolicySlice {
    int step = 0;        // tau-index the requested time snapped to
    double tSnapped = 0.0;
    std::vector<PolicySliceRow> rows;
};

PolicySlice extract_policy_slice(const PolicyField& policy, double t);

// Successive grid refinement (each level doubles nX and nZ, dTau re-derived
// from the stability bound) reporting V(t=0, x, s, l) at reference points.
struct ConvergenceLevel {
    int nX = 0, nZ = 0, nTau = 0;
    double dTau = 0.0;
    // values[point][regime]
    std::vector<std::vector<double>> values;
};

struct ConvergenceReport {
    std::vector<ConvergenceLevel> levels;
    // gaps[k][point][regime] = |levels[k+1].values - levels[k].values|
    std::vector<std::vector<std::vector<double>>> gaps;
};

struct ReferencePoint {
    double x = 0.0;
    double s = 1.0;
};

ConvergenceReport convergence_study(const ProblemSpec& spec, int baseNX, int baseNZ, int levels,
                                    Scheme scheme, const std::vector<ReferencePoint>& points,
                                    int workers = 0);

}  // namespace liquidex
