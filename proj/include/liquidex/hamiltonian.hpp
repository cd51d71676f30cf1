#pragma once

#include <utility>
#include <vector>

#include "liquidex/market.hpp"

namespace liquidex {

// Discrete finite-difference estimates feeding the pointwise control
// optimization, taken in transformed coordinates (x, z = log s).
struct GradientSample {
    double p = 0.0;    // dW/dx (value/shares)
    double qz = 0.0;   // dW/dz (value)
    double mzz = 0.0;  // second z-difference (value)
    double t = 0.0;
    double s = 1.0;    // price, > 0
    int regime = 0;
};

// Search set {0, quantum, ..., upsilonMax} with phi pretabulated, together
// with the forward differences the argmax scan consumes.
struct ControlSet {
    std::vector<double> values;
    std::vector<double> phiValues;
    std::vector<double> rateDiffs;  // values[k+1] - values[k], size n-1
    std::vector<double> phiDiffs;   // phiValues[k+1] - phiValues[k], size n-1

    int size() const noexcept { return static_cast<int>(values.size()); }
};

ControlSet make_control_set(const ProblemSpec& spec);

struct ControlChoice {
    double upsilon = 0.0;  // maximizing rate
    int index = 0;         // its position in the control set
    double hValue = 0.0;   // attained maximum of the Hamiltonian expression
};

// Maximizes v(k) = phiS[k] - u[k] * pEff over k = 0..n-1. Every admissible
// phi is concave, so v is concave in k and the argmax is the first k whose
// forward difference v(k+1) - v(k) = dPhiS[k] - du[k] * pEff drops to or
// below zero (n-1 when none does); the smallest index wins runs of ties.
// Scanning differences rather than levels keeps the k-dependence exact:
// under a linear phi every difference is the same comparison, so the
// recorded rule is a pure endpoint (bang-bang) rule even at nodes where
// phi'(0) e^z and pEff tie within roundoff. This is the only control scan
// in the code base; the solver feeds it pretabulated phi * e^z columns.
inline std::pair<int, double> scan_controls(const double* u, const double* phiS,
                                            const double* du, const double* dPhiS, int n,
                                            double pEff) {
    int best = n - 1;
    for (int k = 0; k + 1 < n; ++k) {
        if (dPhiS[k] <= du[k] * pEff) {
            best = k;
            break;
        }
    }
    return {best, phiS[best] - u[best] * pEff};
}

// Full grid search of
//   sup_u { -u p + (mu(l) - lambda u) qz + sigma(l)^2 (mzz - qz) / 2 + phi(u) s }
// over the problem's control set. The drift and diffusion terms use the
// transformed coordinates: for W linear in e^z this equals the raw-price
// Hamiltonian with q = dV/ds, M = d2V/ds2.
ControlChoice optimize_control(const GradientSample& sample, const ProblemSpec& spec);

// Analytic shortcut for the exponential-saturating phi with rate-free
// coefficients: the unconstrained stationary point ln(s/p)/alpha clamped to
// [0, upsilonMax]; p <= 0 makes the objective nondecreasing, so upsilonMax.
// Continuous-valued; agrees with optimize_control within one quantum.
double optimize_control_closed_form(double p, double s, double alpha, double upsilonMax);

}  // namespace liquidex
