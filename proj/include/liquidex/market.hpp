#pragma once

#include <memory>
#include <vector>

#include "liquidex/errors.hpp"
#include "liquidex/generator.hpp"
#include "liquidex/impact.hpp"

namespace liquidex {

struct DriftDiffusion {
    double drift = 0.0;      // price/time
    double diffusion = 0.0;  // price/sqrt(time)
};

// Evaluation contract for the controlled price SDE coefficients:
// (t, s, selling rate a, regime) -> (drift, diffusion).
class CoefficientProvider {
public:
    virtual ~CoefficientProvider() = default;
    virtual int regimes() const = 0;
    // throws Error("RegimeOutOfRange") for regime outside 0..regimes()-1
    virtual DriftDiffusion eval(double t, double s, double a, int regime) const = 0;
};

// Per-regime geometric Brownian motion data, with an optional permanent
// impact on the drift: drift = (mu(l) - lambda*a)*s, diffusion = sigma(l)*s.
// lambda = 0 recovers the plain regime-switching GBM.
struct RegimeGbm {
    std::vector<double> mu;     // 1/time, per regime
    std::vector<double> sigma;  // 1/sqrt(time), per regime
    double lambda = 0.0;        // 1/shares, drift penalty per unit selling rate

    int regimes() const noexcept { return static_cast<int>(mu.size()); }
    double drift_rate(int regime, double a) const {
        return mu[static_cast<std::size_t>(regime)] - lambda * a;
    }
};

// Plain regime-switching GBM (ignores the selling rate).
class GbmProvider : public CoefficientProvider {
public:
    explicit GbmProvider(RegimeGbm params);
    int regimes() const override { return params_.regimes(); }
    DriftDiffusion eval(double t, double s, double a, int regime) const override;

protected:
    RegimeGbm params_;
};

// GBM with permanent impact: drift reduced by lambda*a*s while selling.
class PermanentImpactGbmProvider : public GbmProvider {
public:
    explicit PermanentImpactGbmProvider(RegimeGbm params);
    DriftDiffusion eval(double t, double s, double a, int regime) const override;
};

// Picks the permanent-impact provider when params.lambda > 0.
std::unique_ptr<CoefficientProvider> make_provider(const RegimeGbm& params);

// Sampled surrogate for the linear-growth and Lipschitz conditions the
// model assumes of its coefficients.
struct GrowthDiagnostic {
    double growth_k = 0.0;     // max over samples of max(|drift|,|diffusion|)/(1+s)
    double lipschitz_k = 0.0;  // max over adjacent s-samples of |delta f|/|delta s|
};
GrowthDiagnostic sample_growth(const CoefficientProvider& model, double s_max, double a_max,
                               double t_max);

struct Domain {
    double xMax = 0.0;  // shares: x in [0, xMax]
    double sMin = 0.0;  // price:  s in [sMin, sMax], 0 < sMin < sMax
    double sMax = 0.0;
};

// Full problem definition: discounting, horizon, control set bounds,
// market model, regime generator, impact functions, and the solve domain.
struct ProblemSpec {
    double beta = 0.0;            // discount rate, >= 0
    double horizonT = 0.0;        // terminal time, > 0
    double upsilonMax = 0.0;      // top selling rate; 0 means the no-trade set {0}
    double controlQuantum = 1.0;  // spacing of the control search set, > 0
    RegimeGbm model;
    GeneratorMatrix generator;
    ImpactSpec impact;
    Domain domain;

    int regimes() const noexcept { return generator.size(); }
    // number of controls {0, quantum, ..., upsilonMax}
    int control_count() const;
};

// Cross-field validation of a fully assembled ProblemSpec. Issue codes:
// RegimeCountMismatch, InvalidDrift, InvalidVolatility, InvalidLambda,
// NegativeDiscount, NonPositiveHorizon, NegativeRateBound,
// NonPositiveQuantum, QuantumMismatch, DomainInvalid.
Validated<ProblemSpec> validate_problem(ProblemSpec spec);

}  // namespace liquidex
