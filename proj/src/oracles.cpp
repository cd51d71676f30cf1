#include "liquidex/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace liquidex {

namespace {

// expm1(a)/a, continuous through a = 0
double expm1_over(double a) {
    return a == 0.0 ? 1.0 : std::expm1(a) / a;
}

}  // namespace

double closed_form_hold_value(double x, double s, double t, double mu, double beta, double T) {
    return x * s * std::exp((mu - beta) * (T - t));
}

double constant_rate_value(double x, double s, double N, double mu, double beta, double T,
                           const BlockImpact& g) {
    const double theta = std::min(T, x / N);
    const double d = mu - beta;
    double value = N * s * theta * expm1_over(d * theta);
    if (x / N >= T) {
        value += g.value(std::max(0.0, x - N * T)) * s * std::exp(d * T);
    }
    return value;
}

std::vector<double> coupled_ode_factors(double t, const GeneratorMatrix& generator,
                                        const std::vector<double>& muPerRegime, double beta,
                                        double T, int steps) {
    const int m = generator.size();
    // march h(tau) = f(T - tau) forward from h(0) = 1:
    //   dh_l/dtau = (mu(l) - beta) h_l + sum_{j != l} q_{lj} (h_j - h_l)
    std::vector<double> h(static_cast<std::size_t>(m), 1.0);
    const double span = T - t;
    if (span <= 0.0) return h;

    const double dTau = span / steps;
    auto rhs = [&](const std::vector<double>& y, std::vector<double>& out) {
        for (int l = 0; l < m; ++l) {
            double acc = (muPerRegime[static_cast<std::size_t>(l)] - beta) *
                         y[static_cast<std::size_t>(l)];
            for (int j = 0; j < m; ++j) {
                if (j != l) {
                    acc += generator.rate(l, j) *
                           (y[static_cast<std::size_t>(j)] - y[static_cast<std::size_t>(l)]);
                }
            }
            out[static_cast<std::size_t>(l)] = acc;
        }
    };

    std::vector<double> k1(h.size()), k2(h.size()), k3(h.size()), k4(h.size()), tmp(h.size());
    for (int n = 0; n < steps; ++n) {
        rhs(h, k1);
        for (std::size_t l = 0; l < h.size(); ++l) tmp[l] = h[l] + 0.5 * dTau * k1[l];
        rhs(tmp, k2);
        for (std::size_t l = 0; l < h.size(); ++l) tmp[l] = h[l] + 0.5 * dTau * k2[l];
        rhs(tmp, k3);
        for (std::size_t l = 0; l < h.size(); ++l) tmp[l] = h[l] + dTau * k3[l];
        rhs(tmp, k4);
        for (std::size_t l = 0; l < h.size(); ++l) {
            h[l] += dTau / 6.0 * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]);
        }
    }
    return h;
}

double coupled_ode_value(double x, double s, double t, int regime,
                         const GeneratorMatrix& generator, const std::vector<double>& muPerRegime,
                         double beta, double T) {
    const std::vector<double> f = coupled_ode_factors(t, generator, muPerRegime, beta, T);
    return x * s * f.at(static_cast<std::size_t>(regime));
}

}  // namespace liquidex
