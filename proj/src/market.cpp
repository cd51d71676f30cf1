#include "liquidex/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace liquidex {

namespace {

void require_regime(int regime, int m) {
    if (regime < 0 || regime >= m) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "regime index %d outside 0..%d", regime, m - 1);
        throw Error("RegimeOutOfRange", buf);
    }
}

}  // namespace

GbmProvider::GbmProvider(RegimeGbm params) : params_(std::move(params)) {}

DriftDiffusion GbmProvider::eval(double /*t*/, double s, double /*a*/, int regime) const {
    require_regime(regime, params_.regimes());
    const auto l = static_cast<std::size_t>(regime);
    return {params_.mu[l] * s, params_.sigma[l] * s};
}

PermanentImpactGbmProvider::PermanentImpactGbmProvider(RegimeGbm params)
    : GbmProvider(std::move(params)) {}

DriftDiffusion PermanentImpactGbmProvider::eval(double /*t*/, double s, double a,
                                                int regime) const {
    require_regime(regime, params_.regimes());
    const auto l = static_cast<std::size_t>(regime);
    return {(params_.mu[l] - params_.lambda * a) * s, params_.sigma[l] * s};
}

std::unique_ptr<CoefficientProvider> make_provider(const RegimeGbm& params) {
    if (params.lambda > 0.0) return std::make_unique<PermanentImpactGbmProvider>(params);
    return std::make_unique<GbmProvider>(params);
}

GrowthDiagnostic sample_growth(const CoefficientProvider& model, double s_max, double a_max,
                               double t_max) {
    GrowthDiagnostic diag;
    const int n_s = 64, n_a = 16, n_t = 4;
    for (int l = 0; l < model.regimes(); ++l) {
        for (int it = 0; it <= n_t; ++it) {
            const double t = t_max * it / n_t;
            for (int ia = 0; ia <= n_a; ++ia) {
                const double a = a_max * ia / n_a;
                DriftDiffusion prev{};
                for (int is = 0; is <= n_s; ++is) {
                    const double s = s_max * is / n_s;
                    const DriftDiffusion f = model.eval(t, s, a, l);
                    const double size = std::max(std::abs(f.drift), std::abs(f.diffusion));
                    diag.growth_k = std::max(diag.growth_k, size / (1.0 + s));
                    if (is > 0) {
                        const double ds = s_max / n_s;
                        diag.lipschitz_k =
                            std::max({diag.lipschitz_k, std::abs(f.drift - prev.drift) / ds,
                                      std::abs(f.diffusion - prev.diffusion) / ds});
                    }
                    prev = f;
                }
            }
        }
    }
    return diag;
}

int ProblemSpec::control_count() const {
    return 1 + static_cast<int>(std::lround(upsilonMax / controlQuantum));
}

Validated<ProblemSpec> validate_problem(ProblemSpec spec) {
    IssueList issues;
    const int m = spec.generator.size();
    if (m < 1 || spec.model.regimes() != m ||
        static_cast<int>(spec.model.sigma.size()) != m) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "generator has %d regimes, mu %zu, sigma %zu", m,
                      spec.model.mu.size(), spec.model.sigma.size());
        issues.push_back({"RegimeCountMismatch", buf});
    }
    for (double mu : spec.model.mu) {
        if (!std::isfinite(mu)) issues.push_back({"InvalidDrift", "mu entries must be finite"});
    }
    for (double sg : spec.model.sigma) {
        if (!std::isfinite(sg) || sg < 0.0) {
            issues.push_back({"InvalidVolatility", "sigma entries must be finite and >= 0"});
        }
    }
    if (!std::isfinite(spec.model.lambda) || spec.model.lambda < 0.0) {
        issues.push_back({"InvalidLambda", "lambda must be finite and >= 0"});
    }
    if (!std::isfinite(spec.beta) || spec.beta < 0.0) {
        issues.push_back({"NegativeDiscount", "beta must be finite and >= 0"});
    }
    if (!std::isfinite(spec.horizonT) || spec.horizonT <= 0.0) {
        issues.push_back({"NonPositiveHorizon", "horizon T must be > 0"});
    }
    if (!std::isfinite(spec.upsilonMax) || spec.upsilonMax < 0.0) {
        issues.push_back({"NegativeRateBound", "upsilon_max must be >= 0"});
    }
    if (!std::isfinite(spec.controlQuantum) || spec.controlQuantum <= 0.0) {
        issues.push_back({"NonPositiveQuantum", "control_quantum must be > 0"});
    } else if (std::isfinite(spec.upsilonMax) && spec.upsilonMax >= 0.0) {
        const double ratio = spec.upsilonMax / spec.controlQuantum;
        if (std::abs(ratio - std::lround(ratio)) > 1e-9 * (1.0 + ratio)) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "upsilon_max / control_quantum = %.17g is not integral",
                          ratio);
            issues.push_back({"QuantumMismatch", buf});
        }
    }
    if (!(spec.domain.xMax > 0.0) || !std::isfinite(spec.domain.xMax)) {
        issues.push_back({"DomainInvalid", "x_max must be > 0"});
    }
    if (!(spec.domain.sMin > 0.0) || !(spec.domain.sMax > spec.domain.sMin) ||
        !std::isfinite(spec.domain.sMax)) {
        issues.push_back({"DomainInvalid", "price bounds need 0 < s_min < s_max"});
    }
    if (!issues.empty()) return make_invalid<ProblemSpec>(std::move(issues));
    return make_valid(std::move(spec));
}

}  // namespace liquidex
