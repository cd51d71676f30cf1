#pragma once

#include <cstdint>
#include <vector>

#include "liquidex/market.hpp"
#include "liquidex/solver.hpp"

namespace liquidex {

// One piece of a piecewise-constant regime trajectory: `regime` holds from
// `start` until the next element's start (or the horizon).
struct RegimeSegment {
    double start = 0.0;
    int regime = 0;
};

// Exact continuous-time Markov chain sampling: holding times are
// exponential with the exit rate, the next regime is drawn from the
// normalized off-diagonal rates. Truncated at T.
std::vector<RegimeSegment> sample_regime_path(const GeneratorMatrix& generator, int l0, double T,
                                              std::uint64_t seed);

// Selling-rate rule queried along simulated paths.
class Policy {
public:
    virtual ~Policy() = default;
    virtual double rate(double t, double x, double s, int regime) const = 0;
};

// Nearest-neighbor lookup in a recorded policy field, clamped to the grid
// box. The field must outlive the policy.
class GridPolicy : public Policy {
public:
    explicit GridPolicy(const PolicyField& field) : field_(&field) {}
    double rate(double t, double x, double s, int regime) const override;

private:
    const PolicyField* field_;
};

class ConstantPolicy : public Policy {
public:
    explicit ConstantPolicy(double rate) : rate_(rate) {}
    double rate(double, double, double, int) const override { return rate_; }

private:
    double rate_;
};

struct PathOutcome {
    double payoff = 0.0;        // J: discounted selling revenue + terminal block sale
    double payoffDynkin = 0.0;  // J': g(x0) s0 + discounted running-cost integral
    double exitTime = 0.0;      // first time the holdings hit 0, else T
    bool exitedEarly = false;
};

// Simulates one path from t = 0: the regime trajectory is drawn first, the
// price advances in log space per dt-substep with coefficients frozen at
// the substep start, holdings fall at the policy rate, and the payoff
// integral uses the left-endpoint rule. A zero crossing of x inside a
// substep is located by linear interpolation and ends the path there.
// Throws Error("InvalidDt") and Error("NonPositivePrice").
PathOutcome simulate_path(const Policy& policy, const ProblemSpec& spec, double x0, double s0,
                          int l0, double dt, std::uint64_t seed);

// The running-cost (Dynkin) estimate of the same path.
double payoff_dynkin(const Policy& policy, const ProblemSpec& spec, double x0, double s0, int l0,
                     double dt, std::uint64_t seed);

struct SimResult {
    double mean = 0.0;
    double stdErr = 0.0;
    long nPaths = 0;
    double meanExitTime = 0.0;
    double fractionExitedEarly = 0.0;
};

// Per-path outcomes for paths p = 0..nPaths-1, each seeded independently
// from (seed, p); the outcome vector is identical for every worker count.
std::vector<PathOutcome> run_paths(const Policy& policy, const ProblemSpec& spec, double x0,
                                   double s0, int l0, long nPaths, double dt, std::uint64_t seed,
                                   int workers = 0);

// Mean / standard error (pairwise-summed) of the direct and Dynkin payoffs.
SimResult summarize_direct(const std::vector<PathOutcome>& outcomes);
SimResult summarize_dynkin(const std::vector<PathOutcome>& outcomes);

SimResult evaluate_policy(const Policy& policy, const ProblemSpec& spec, double x0, double s0,
                          int l0, long nPaths, double dt, std::uint64_t seed, int workers = 0);

// Both estimators over common random numbers, plus their paired difference.
struct PairedSimResult {
    SimResult direct;
    SimResult dynkin;
    double diffMean = 0.0;
    double diffStdErr = 0.0;
};

PairedSimResult summarize_paired(const std::vector<PathOutcome>& outcomes);

PairedSimResult evaluate_policy_paired(const Policy& policy, const ProblemSpec& spec, double x0,
                                       double s0, int l0, long nPaths, double dt,
                                       std::uint64_t seed, int workers = 0);

}  // namespace liquidex
