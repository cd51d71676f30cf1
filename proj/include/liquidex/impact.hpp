#pragma once

#include <vector>

#include "liquidex/errors.hpp"

namespace liquidex {

// --------------------------------------------------------------------------
// Temporary impact phi: the per-share revenue multiplier of continuous
// selling. Selling at rate a earns cash at rate phi(a)*S instead of a*S.
// All families satisfy phi(0)=0, phi nondecreasing, phi concave and
// phi(a) <= a (unit slope at the origin).
// --------------------------------------------------------------------------

enum class PhiFamily { Linear, ExponentialSaturating, TabulatedConcave };

class TemporaryImpact {
public:
    // phi(a) = a (no temporary impact)
    static TemporaryImpact linear();

    // phi(a) = (1 - exp(-alpha*a)) / alpha, alpha > 0.
    // Throws Error("AlphaNonPositive") otherwise.
    static TemporaryImpact exponential_saturating(double alpha);

    // Piecewise-linear interpolation through (rate, value) nodes; extended
    // beyond the last node with the final slope. Checks: node 0 is (0, 0),
    // rates strictly increasing, values nondecreasing, slopes nonincreasing
    // (concavity, tolerance 1e-12), and the initial slope within 5% of 1
    // from below (Assumption-2 surrogate phi'(0)=1 and phi(a) <= a).
    static Validated<TemporaryImpact> tabulated_concave(std::vector<double> rates,
                                                        std::vector<double> values);

    PhiFamily family() const noexcept { return family_; }
    double alpha() const noexcept { return alpha_; }
    const std::vector<double>& node_rates() const noexcept { return rates_; }
    const std::vector<double>& node_values() const noexcept { return values_; }

    // phi(a); throws Error("NegativeRate") for a < 0.
    double operator()(double a) const;

private:
    TemporaryImpact() = default;

    PhiFamily family_ = PhiFamily::Linear;
    double alpha_ = 0.0;          // ExponentialSaturating only
    std::vector<double> rates_;   // TabulatedConcave only
    std::vector<double> values_;
};

// --------------------------------------------------------------------------
// Block impact g: effective shares credited when x shares are sold in one
// block at the horizon (terminal proceeds g(x)*S). Continuous with a
// continuous derivative, g(0)=0, nondecreasing.
// --------------------------------------------------------------------------

enum class GFamily { Identity, PiecewisePolynomial };

class BlockImpact {
public:
    // g(x) = x
    static BlockImpact identity();

    // Piecewise polynomial on [0, b_1], [b_1, b_2], ..., [b_K, +inf).
    // `breakpoints` are the interior branch boundaries b_1 < ... < b_K (all
    // > 0); `coeffs[k]` holds the ascending-power coefficients of branch k
    // (coeffs.size() == breakpoints.size() + 1). Checks: g(0)=0, value and
    // derivative continuous across every breakpoint (tolerance 1e-9), and
    // g nondecreasing on a sampled lattice.
    static Validated<BlockImpact> piecewise_polynomial(std::vector<double> breakpoints,
                                                       std::vector<std::vector<double>> coeffs);

    // The built-in concave discount curve shipped with the default
    // configuration: identity up to 5 shares, then progressively steeper
    // quadratic/linear discounts with marginal value falling to 0.5 beyond
    // 60 shares.
    static BlockImpact builtin_concave();

    GFamily family() const noexcept { return family_; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<std::vector<double>>& coefficients() const noexcept { return coeffs_; }

    // g(x) and g'(x); throw Error("NegativeShares") for x < 0.
    double value(double x) const;
    double derivative(double x) const;

private:
    BlockImpact() = default;

    int branch_index(double x) const;

    GFamily family_ = GFamily::Identity;
    std::vector<double> breakpoints_;
    std::vector<std::vector<double>> coeffs_;
};

// Bundle consumed by the problem definition.
struct ImpactSpec {
    TemporaryImpact phi = TemporaryImpact::linear();
    BlockImpact g = BlockImpact::identity();
};

}  // namespace liquidex
