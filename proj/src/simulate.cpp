#include "liquidex/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "liquidex/parallel.hpp"
#include "liquidex/rng.hpp"

namespace liquidex {

namespace {

std::vector<RegimeSegment> draw_regime_path(const GeneratorMatrix& generator, int l0, double T,
                                            Rng& rng) {
    std::vector<RegimeSegment> path{{0.0, l0}};
    double t = 0.0;
    int l = l0;
    while (true) {
        const double exitRate = generator.exit_rate(l);
        if (exitRate <= 0.0) break;  // absorbing regime
        t += rng.exponential(exitRate);
        if (t >= T) break;
        // categorical draw over the off-diagonal rates
        const double u = rng.uniform() * exitRate;
        double acc = 0.0;
        int next = l;
        for (int j = 0; j < generator.size(); ++j) {
            if (j == l) continue;
            acc += generator.rate(l, j);
            if (u < acc) {
                next = j;
                break;
            }
        }
        if (next == l) {  // guard against accumulated rounding at u ~ exitRate
            for (int j = generator.size() - 1; j >= 0; --j) {
                if (j != l) {
                    next = j;
                    break;
                }
            }
        }
        l = next;
        path.push_back({t, l});
    }
    return path;
}

PathOutcome run_single_path(const Policy& policy, const ProblemSpec& spec, double x0, double s0,
                            int l0, double dt, Rng& rng) {
    const double T = spec.horizonT;
    const double beta = spec.beta;
    const TemporaryImpact& phi = spec.impact.phi;
    const BlockImpact& g = spec.impact.g;

    PathOutcome outcome;
    outcome.payoffDynkin = g.value(x0) * s0;
    if (x0 == 0.0) {
        outcome.exitedEarly = true;
        return outcome;  // absorbed immediately; g(0) = 0 ends the payoff at 0
    }

    const std::vector<RegimeSegment> regimes = draw_regime_path(spec.generator, l0, T, rng);

    double x = x0;
    double logS = std::log(s0);
    bool exited = false;

    for (std::size_t seg = 0; seg < regimes.size() && !exited; ++seg) {
        const int l = regimes[seg].regime;
        const double segStart = regimes[seg].start;
        const double segEnd = seg + 1 < regimes.size() ? regimes[seg + 1].start : T;
        const double sigma = spec.model.sigma[static_cast<std::size_t>(l)];

        const long nSub = std::max<long>(1, static_cast<long>(std::ceil((segEnd - segStart) / dt - 1e-9)));
        for (long k = 0; k < nSub; ++k) {
            const double t = segStart + dt * static_cast<double>(k);
            double h = std::min(dt, segEnd - t);
            if (h <= 0.0) break;

            const double s = std::exp(logS);
            const double upsilon = std::clamp(policy.rate(t, x, s, l), 0.0, spec.upsilonMax);
            // locate a zero crossing of the holdings inside the substep
            if (upsilon > 0.0 && x - upsilon * h <= 0.0) {
                h = x / upsilon;
                exited = true;
            }

            const double disc = std::exp(-beta * t);
            const double phiU = phi(upsilon);
            const double gx = g.value(x);
            outcome.payoff += disc * phiU * s * h;
            const double driftRate = spec.model.drift_rate(l, upsilon);
            // running cost: phi(u)s - beta g(x)s - u g'(x)s + mu(t,s,u,l) g(x)
            outcome.payoffDynkin +=
                disc * (phiU * s - beta * gx * s - upsilon * g.derivative(x) * s +
                        driftRate * s * gx) * h;

            logS += (driftRate - 0.5 * sigma * sigma) * h + sigma * std::sqrt(h) * rng.normal();
            if (exited) {
                x = 0.0;
                outcome.exitTime = t + h;
                outcome.exitedEarly = true;
                return outcome;  // terminal term is g(0) s = 0
            }
            x -= upsilon * h;
        }
    }

    outcome.exitTime = T;
    outcome.payoff += std::exp(-beta * T) * g.value(x) * std::exp(logS);
    return outcome;
}

SimResult summarize(const std::vector<PathOutcome>& outcomes, bool dynkin) {
    if (outcomes.size() < 2) {
        throw Error("InvalidCounts", "need at least 2 paths for a standard error");
    }
    const std::size_t n = outcomes.size();
    std::vector<double> values(n), exits(n);
    double exitedCount = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        values[p] = dynkin ? outcomes[p].payoffDynkin : outcomes[p].payoff;
        exits[p] = outcomes[p].exitTime;
        if (outcomes[p].exitedEarly) exitedCount += 1.0;
    }
    SimResult result;
    result.nPaths = static_cast<long>(n);
    result.mean = pairwise_sum(values) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double d = values[p] - result.mean;
        sq[p] = d * d;
    }
    const double variance = pairwise_sum(sq) / static_cast<double>(n - 1);
    result.stdErr = std::sqrt(variance / static_cast<double>(n));
    result.meanExitTime = pairwise_sum(exits) / static_cast<double>(n);
    result.fractionExitedEarly = exitedCount / static_cast<double>(n);
    return result;
}

void check_path_inputs(double x0, double s0, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("InvalidDt", "dt must be positive");
    if (!(s0 > 0.0)) throw Error("NonPositivePrice", "paths need a positive starting price");
    if (x0 < 0.0) throw Error("NegativeShares", "paths need nonnegative starting holdings");
}

}  // namespace

std::vector<RegimeSegment> sample_regime_path(const GeneratorMatrix& generator, int l0, double T,
                                              std::uint64_t seed) {
    Rng rng(seed);
    return draw_regime_path(generator, l0, T, rng);
}

double GridPolicy::rate(double t, double x, double s, int regime) const {
    const GridSpec& grid = field_->grid();
    const auto snap = [](double v, int top) {
        return static_cast<int>(std::clamp<long>(std::lround(v), 0, top));
    };
    const int n = snap((grid.horizonT - t) / grid.dTau, grid.nTau);
    const int i = snap(x / grid.dX, grid.nX);
    const int j = snap((std::log(s) - grid.zMin) / grid.dZ, grid.nZ);
    return field_->rate_at(n, i, j, regime);
}

PathOutcome simulate_path(const Policy& policy, const ProblemSpec& spec, double x0, double s0,
                          int l0, double dt, std::uint64_t seed) {
    check_path_inputs(x0, s0, dt);
    Rng rng(seed);
    return run_single_path(policy, spec, x0, s0, l0, dt, rng);
}

double payoff_dynkin(const Policy& policy, const ProblemSpec& spec, double x0, double s0, int l0,
                     double dt, std::uint64_t seed) {
    return simulate_path(policy, spec, x0, s0, l0, dt, seed).payoffDynkin;
}

std::vector<PathOutcome> run_paths(const Policy& policy, const ProblemSpec& spec, double x0,
                                   double s0, int l0, long nPaths, double dt, std::uint64_t seed,
                                   int workers) {
    check_path_inputs(x0, s0, dt);
    if (nPaths < 2) throw Error("InvalidCounts", "need at least 2 paths");
    std::vector<PathOutcome> outcomes(static_cast<std::size_t>(nPaths));
    parallel_for(outcomes.size(), resolve_workers(workers), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            Rng rng(mix_seed(seed, p));
            outcomes[p] = run_single_path(policy, spec, x0, s0, l0, dt, rng);
        }
    });
    return outcomes;
}

SimResult summarize_direct(const std::vector<PathOutcome>& outcomes) {
    return summarize(outcomes, false);
}

SimResult summarize_dynkin(const std::vector<PathOutcome>& outcomes) {
    return summarize(outcomes, true);
}

SimResult evaluate_policy(const Policy& policy, const ProblemSpec& spec, double x0, double s0,
                          int l0, long nPaths, double dt, std::uint64_t seed, int workers) {
    return summarize_direct(run_paths(policy, spec, x0, s0, l0, nPaths, dt, seed, workers));
}

PairedSimResult summarize_paired(const std::vector<PathOutcome>& outcomes) {
    PairedSimResult result;
    result.direct = summarize_direct(outcomes);
    result.dynkin = summarize_dynkin(outcomes);

    std::vector<double> diffs(outcomes.size());
    for (std::size_t p = 0; p < outcomes.size(); ++p) {
        diffs[p] = outcomes[p].payoff - outcomes[p].payoffDynkin;
    }
    const double n = static_cast<double>(outcomes.size());
    result.diffMean = pairwise_sum(diffs) / n;
    std::vector<double> sq(outcomes.size());
    for (std::size_t p = 0; p < outcomes.size(); ++p) {
        const double d = diffs[p] - result.diffMean;
        sq[p] = d * d;
    }
    result.diffStdErr = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    return result;
}

PairedSimResult evaluate_policy_paired(const Policy& policy, const ProblemSpec& spec, double x0,
                                       double s0, int l0, long nPaths, double dt,
                                       std::uint64_t seed, int workers) {
    return summarize_paired(run_paths(policy, spec, x0, s0, l0, nPaths, dt, seed, workers));
}

}  // namespace liquidex
