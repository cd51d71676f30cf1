#pragma once

#include <vector>

#include "liquidex/generator.hpp"
#include "liquidex/impact.hpp"

namespace liquidex {

// Independent closed-form and ODE ground truths for the solver and the
// Monte Carlo engine. Each specializes the payoff functional to a case
// with a pencil-and-paper solution.

// Single regime, no selling, identity g: V = x * s * e^{(mu - beta)(T - t)}.
// Optimal whenever mu > beta with linear phi (holding dominates).
double closed_form_hold_value(double x, double s, double t, double mu, double beta, double T);

// Single regime, constant selling rate N > 0, linear phi:
//   theta = min(T, x/N),
//   J = N s (e^{(mu-beta) theta} - 1)/(mu - beta)
//     + [theta = T] g(x - N T) s e^{(mu-beta) T},
// with the mu = beta limit N s theta for the first term.
double constant_rate_value(double x, double s, double N, double mu, double beta, double T,
                           const BlockImpact& g);

// No-trade value under regime switching, identity g: V = x * s * f(t, l)
// where f solves the coupled linear ODE system
//   f_l' = (beta - mu(l)) f_l - sum_{j != l} q_{lj} (f_j - f_l),  f(T, .) = 1,
// integrated backward from T with classic fourth-order steps.
std::vector<double> coupled_ode_factors(double t, const GeneratorMatrix& generator,
                                        const std::vector<double>& muPerRegime, double beta,
                                        double T, int steps = 20000);

double coupled_ode_value(double x, double s, double t, int regime,
                         const GeneratorMatrix& generator, const std::vector<double>& muPerRegime,
                         double beta, double T);

}  // namespace liquidex
