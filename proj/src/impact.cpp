#include "liquidex/impact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace liquidex {

namespace {

Issue indexed_issue(const char* code, const char* fmt, int k, double v) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), fmt, k, v);
    return {code, buf};
}

}  // namespace

// ---------------------------------------------------------------- phi ----

TemporaryImpact TemporaryImpact::linear() {
    TemporaryImpact phi;
    phi.family_ = PhiFamily::Linear;
    return phi;
}

TemporaryImpact TemporaryImpact::exponential_saturating(double alpha) {
    if (!(alpha > 0.0)) throw Error("AlphaNonPositive", "exponential impact needs alpha > 0");
    TemporaryImpact phi;
    phi.family_ = PhiFamily::ExponentialSaturating;
    phi.alpha_ = alpha;
    return phi;
}

Validated<TemporaryImpact> TemporaryImpact::tabulated_concave(std::vector<double> rates,
                                                              std::vector<double> values) {
    IssueList issues;
    if (rates.size() != values.size()) {
        issues.push_back({"TableShapeMismatch", "rate and value lists differ in length"});
        return make_invalid<TemporaryImpact>(std::move(issues));
    }
    if (rates.size() < 2) {
        issues.push_back({"TableTooShort", "need at least two (rate, value) nodes"});
        return make_invalid<TemporaryImpact>(std::move(issues));
    }
    if (rates.front() != 0.0 || values.front() != 0.0) {
        issues.push_back({"OriginNonzero", "first node must be (0, 0)"});
    }
    for (std::size_t k = 0; k + 1 < rates.size(); ++k) {
        if (!(rates[k + 1] > rates[k])) {
            issues.push_back(indexed_issue("RatesNotIncreasing", "node %d rate %g does not increase",
                                           static_cast<int>(k + 1), rates[k + 1]));
        }
    }
    if (issues.empty()) {
        double prev_slope = 1.0;
        for (std::size_t k = 0; k + 1 < rates.size(); ++k) {
            const double slope = (values[k + 1] - values[k]) / (rates[k + 1] - rates[k]);
            if (slope < -1e-12) {
                issues.push_back(indexed_issue("Decreasing", "segment %d has slope %g",
                                               static_cast<int>(k), slope));
            }
            if (k == 0) {
                // Assumption-2 surrogate: phi'(0)=1 within 5%, from below so
                // that phi(a) <= a holds everywhere.
                if (std::abs(slope - 1.0) > 0.05 || slope > 1.0 + 1e-12) {
                    issues.push_back(indexed_issue("SlopeAtZeroNotUnit",
                                                   "segment %d slope %g is not in [0.95, 1]", 0,
                                                   slope));
                }
            } else if (slope > prev_slope + 1e-12) {
                issues.push_back(indexed_issue("NotConcave", "segment %d has slope %g above the previous",
                                               static_cast<int>(k), slope));
            }
            prev_slope = slope;
        }
    }
    if (!issues.empty()) return make_invalid<TemporaryImpact>(std::move(issues));

    TemporaryImpact phi;
    phi.family_ = PhiFamily::TabulatedConcave;
    phi.rates_ = std::move(rates);
    phi.values_ = std::move(values);
    return make_valid(std::move(phi));
}

double TemporaryImpact::operator()(double a) const {
    if (a < 0.0) throw Error("NegativeRate", "phi is defined for nonnegative rates");
    switch (family_) {
        case PhiFamily::Linear:
            return a;
        case PhiFamily::ExponentialSaturating:
            return -std::expm1(-alpha_ * a) / alpha_;
        case PhiFamily::TabulatedConcave:
            break;
    }
    // piecewise-linear table; extend the last slope beyond the final node
    const auto it = std::upper_bound(rates_.begin(), rates_.end(), a);
    std::size_t hi = static_cast<std::size_t>(it - rates_.begin());
    if (hi == 0) return values_.front();
    if (hi == rates_.size()) hi = rates_.size() - 1;
    const std::size_t lo = hi - 1;
    const double slope = (values_[hi] - values_[lo]) / (rates_[hi] - rates_[lo]);
    return values_[lo] + slope * (a - rates_[lo]);
}

// ------------------------------------------------------------------ g ----

BlockImpact BlockImpact::identity() {
    BlockImpact g;
    g.family_ = GFamily::Identity;
    return g;
}

Validated<BlockImpact> BlockImpact::piecewise_polynomial(std::vector<double> breakpoints,
                                                         std::vector<std::vector<double>> coeffs) {
    IssueList issues;
    if (coeffs.size() != breakpoints.size() + 1) {
        issues.push_back({"BranchCountMismatch", "need exactly one more branch than breakpoints"});
        return make_invalid<BlockImpact>(std::move(issues));
    }
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k].empty()) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "branch %d has no coefficients", static_cast<int>(k));
            issues.push_back({"EmptyBranch", buf});
        }
        for (double c : coeffs[k]) {
            if (!std::isfinite(c)) {
                issues.push_back(indexed_issue("NonFiniteCoefficient", "branch %d contains %g",
                                               static_cast<int>(k), c));
            }
        }
    }
    double prev = 0.0;
    for (std::size_t k = 0; k < breakpoints.size(); ++k) {
        if (!(breakpoints[k] > prev)) {
            issues.push_back(indexed_issue("BreakpointsNotIncreasing", "breakpoint %d = %g",
                                           static_cast<int>(k), breakpoints[k]));
        }
        prev = breakpoints[k];
    }
    if (!issues.empty()) return make_invalid<BlockImpact>(std::move(issues));

    BlockImpact g;
    g.family_ = GFamily::PiecewisePolynomial;
    g.breakpoints_ = std::move(breakpoints);
    g.coeffs_ = std::move(coeffs);

    if (std::abs(g.value(0.0)) > 1e-12) {
        issues.push_back({"OriginNonzero", "g(0) must be 0"});
    }
    // value and derivative must match across every breakpoint
    auto poly = [](const std::vector<double>& c, double x) {
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
        return acc;
    };
    auto poly_prime = [](const std::vector<double>& c, double x) {
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 1;) acc = acc * x + c[k] * static_cast<double>(k);
        return acc;
    };
    for (std::size_t k = 0; k < g.breakpoints_.size(); ++k) {
        const double b = g.breakpoints_[k];
        const double v_left = poly(g.coeffs_[k], b);
        const double v_right = poly(g.coeffs_[k + 1], b);
        if (std::abs(v_left - v_right) > 1e-9) {
            issues.push_back(indexed_issue("DiscontinuousValue", "breakpoint %d: branches differ by %g",
                                           static_cast<int>(k), v_left - v_right));
        }
        const double d_left = poly_prime(g.coeffs_[k], b);
        const double d_right = poly_prime(g.coeffs_[k + 1], b);
        if (std::abs(d_left - d_right) > 1e-9) {
            issues.push_back(indexed_issue("DiscontinuousDerivative",
                                           "breakpoint %d: derivatives differ by %g",
                                           static_cast<int>(k), d_left - d_right));
        }
    }
    // nondecreasing on a sampled lattice covering all branches
    const double x_hi = (g.breakpoints_.empty() ? 1.0 : g.breakpoints_.back()) * 1.5 + 1.0;
    const int samples = 4096;
    for (int k = 0; k <= samples; ++k) {
        const double x = x_hi * k / samples;
        if (g.derivative(x) < -1e-9) {
            issues.push_back(indexed_issue("Decreasing", "g'(x) < 0 near sample %d (x = %g)", k, x));
            break;
        }
    }
    if (!issues.empty()) return make_invalid<BlockImpact>(std::move(issues));
    return make_valid(std::move(g));
}

BlockImpact BlockImpact::builtin_concave() {
    auto g = piecewise_polynomial({5.0, 15.0, 40.0, 60.0},
                                  {{0.0, 1.0},
                                   {-0.25, 1.1, -0.01},
                                   {2.0, 0.8},
                                   {-10.0, 1.4, -0.0075},
                                   {17.0, 0.5}});
    return g.get();  // the built-in table satisfies every check
}

int BlockImpact::branch_index(double x) const {
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return static_cast<int>(it - breakpoints_.begin());
}

double BlockImpact::value(double x) const {
    if (x < 0.0) throw Error("NegativeShares", "g is defined for nonnegative share counts");
    if (family_ == GFamily::Identity) return x;
    const std::vector<double>& c = coeffs_[static_cast<std::size_t>(branch_index(x))];
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

double BlockImpact::derivative(double x) const {
    if (x < 0.0) throw Error("NegativeShares", "g is defined for nonnegative share counts");
    if (family_ == GFamily::Identity) return 1.0;
    const std::vector<double>& c = coeffs_[static_cast<std::size_t>(branch_index(x))];
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) acc = acc * x + c[k] * static_cast<double>(k);
    return acc;
}

}  // namespace liquidex
