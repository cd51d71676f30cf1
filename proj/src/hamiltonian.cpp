#include "liquidex/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace liquidex {

ControlSet make_control_set(const ProblemSpec& spec) {
    ControlSet set;
    const int n = spec.control_count();
    set.values.resize(static_cast<std::size_t>(n));
    set.phiValues.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) set.values[static_cast<std::size_t>(k)] = spec.controlQuantum * k;
    // snap the top of the range before tabulating phi, so quantum rounding
    // drift cannot push the largest control past upsilonMax
    if (n > 1) set.values.back() = spec.upsilonMax;
    for (int k = 0; k < n; ++k) {
        set.phiValues[static_cast<std::size_t>(k)] = spec.impact.phi(set.values[static_cast<std::size_t>(k)]);
    }
    if (n > 1) {
        set.rateDiffs.resize(static_cast<std::size_t>(n) - 1);
        set.phiDiffs.resize(static_cast<std::size_t>(n) - 1);
        for (int k = 0; k + 1 < n; ++k) {
            set.rateDiffs[static_cast<std::size_t>(k)] =
                set.values[static_cast<std::size_t>(k) + 1] - set.values[static_cast<std::size_t>(k)];
            set.phiDiffs[static_cast<std::size_t>(k)] =
                set.phiValues[static_cast<std::size_t>(k) + 1] - set.phiValues[static_cast<std::size_t>(k)];
        }
    }
    return set;
}

ControlChoice optimize_control(const GradientSample& sample, const ProblemSpec& spec) {
    const ControlSet set = make_control_set(spec);
    std::vector<double> phiS(set.phiValues.size());
    for (std::size_t k = 0; k < phiS.size(); ++k) phiS[k] = set.phiValues[k] * sample.s;
    std::vector<double> dPhiS(set.phiDiffs.size());
    for (std::size_t k = 0; k < dPhiS.size(); ++k) dPhiS[k] = set.phiDiffs[k] * sample.s;

    const auto l = static_cast<std::size_t>(sample.regime);
    const double sigma2 = spec.model.sigma[l] * spec.model.sigma[l];
    // -u p + (mu - lambda u) qz + sigma^2 (mzz - qz)/2 + phi(u) s
    //   = [phi(u) s - u (p + lambda qz)] + [mu qz + sigma^2 (mzz - qz)/2]
    const double pEff = sample.p + spec.model.lambda * sample.qz;
    const double base = spec.model.mu[l] * sample.qz + 0.5 * sigma2 * (sample.mzz - sample.qz);

    const auto [index, value] = scan_controls(set.values.data(), phiS.data(),
                                              set.rateDiffs.data(), dPhiS.data(), set.size(), pEff);
    return {set.values[static_cast<std::size_t>(index)], index, value + base};
}

double optimize_control_closed_form(double p, double s, double alpha, double upsilonMax) {
    if (!(p > 0.0)) return upsilonMax;
    const double stationary = std::log(s / p) / alpha;
    return std::clamp(stationary, 0.0, upsilonMax);
}

}  // namespace liquidex
