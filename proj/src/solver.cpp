#include "liquidex/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "liquidex/parallel.hpp"

namespace liquidex {

namespace {

std::size_t plane_size(const GridSpec& grid) {
    return static_cast<std::size_t>(grid.nX + 1) * static_cast<std::size_t>(grid.nZ + 1);
}

int snap_time_to_step(const GridSpec& grid, double t) {
    const double tau = grid.horizonT - t;
    const long n = std::lround(tau / grid.dTau);
    return static_cast<int>(std::clamp<long>(n, 0, grid.nTau));
}

}  // namespace

// ------------------------------------------------------------ ValueField --

ValueField::ValueField(GridSpec grid, int regimes, bool storeFull)
    : grid_(grid), regimes_(regimes), storeFull_(storeFull) {
    sliceSize_ = static_cast<std::size_t>(regimes) * plane_size(grid);
    const std::size_t slices = storeFull ? static_cast<std::size_t>(grid.nTau) + 1 : 1;
    data_.assign(sliceSize_ * slices, 0.0);
}

double* ValueField::slice(int n) {
    return const_cast<double*>(static_cast<const ValueField*>(this)->slice(n));
}

const double* ValueField::slice(int n) const {
    if (n < 0 || n > grid_.nTau || !has_slice(n)) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "tau-slice %d is not stored (full storage: %s)", n,
                      storeFull_ ? "on" : "off");
        throw Error("SliceNotStored", buf);
    }
    return data_.data() + (storeFull_ ? static_cast<std::size_t>(n) * sliceSize_ : 0);
}

double ValueField::at(int n, int i, int j, int l) const {
    const std::size_t idx =
        (static_cast<std::size_t>(l) * (grid_.nX + 1) + static_cast<std::size_t>(i)) *
            (grid_.nZ + 1) +
        static_cast<std::size_t>(j);
    return slice(n)[idx];
}

// ----------------------------------------------------------- PolicyField --

PolicyField::PolicyField(GridSpec grid, int regimes, std::vector<double> controlValues)
    : grid_(grid), regimes_(regimes), controlValues_(std::move(controlValues)) {
    sliceSize_ = static_cast<std::size_t>(regimes) * plane_size(grid);
    data_.assign(sliceSize_ * (static_cast<std::size_t>(grid.nTau) + 1), 0);
}

std::uint16_t* PolicyField::slice(int n) {
    return const_cast<std::uint16_t*>(static_cast<const PolicyField*>(this)->slice(n));
}

const std::uint16_t* PolicyField::slice(int n) const {
    if (empty() || n < 0 || n > grid_.nTau) {
        throw Error("SliceNotStored", "policy storage was disabled or the step is out of range");
    }
    return data_.data() + static_cast<std::size_t>(n) * sliceSize_;
}

std::uint16_t PolicyField::index_at(int n, int i, int j, int l) const {
    const std::size_t idx =
        (static_cast<std::size_t>(l) * (grid_.nX + 1) + static_cast<std::size_t>(i)) *
            (grid_.nZ + 1) +
        static_cast<std::size_t>(j);
    return slice(n)[idx];
}

double PolicyField::rate_at(int n, int i, int j, int l) const {
    return controlValues_[index_at(n, i, j, l)];
}

// --------------------------------------------------------- init_terminal --

std::vector<double> init_terminal(const GridSpec& grid, const ImpactSpec& impact, int regimes) {
    const std::size_t plane = plane_size(grid);
    std::vector<double> slice(static_cast<std::size_t>(regimes) * plane);
    for (int i = 0; i <= grid.nX; ++i) {
        const double gx = impact.g.value(grid.x_of(i));
        for (int j = 0; j <= grid.nZ; ++j) {
            slice[static_cast<std::size_t>(i) * (grid.nZ + 1) + j] = gx * grid.s_of(j);
        }
    }
    for (int l = 1; l < regimes; ++l) {
        std::memcpy(slice.data() + static_cast<std::size_t>(l) * plane, slice.data(),
                    plane * sizeof(double));
    }
    return slice;
}

// ---------------------------------------------------------------- Stepper --

Stepper::Stepper(const ProblemSpec& spec, const GridSpec& grid, Scheme scheme, int workers)
    : grid_(grid),
      scheme_(scheme),
      regimes_(spec.regimes()),
      workers_(resolve_workers(workers)),
      lambda_(spec.model.lambda),
      controls_(make_control_set(spec)) {
    const double dTau = grid.dTau;
    const double dZ = grid.dZ;
    coeffs_.resize(static_cast<std::size_t>(regimes_));
    for (int l = 0; l < regimes_; ++l) {
        const double sigma = spec.model.sigma[static_cast<std::size_t>(l)];
        const double sigma2 = sigma * sigma;
        // the rate-dependent part of the drift (permanent impact) lives in
        // the sup; the fixed coefficients carry the rate-free z-advection
        const double b = spec.model.mu[static_cast<std::size_t>(l)] - 0.5 * sigma2;
        Coefficients& c = coeffs_[static_cast<std::size_t>(l)];
        c.diag = 1.0 + dTau * (-spec.beta - spec.generator.exit_rate(l) - sigma2 / (dZ * dZ));
        c.zPlus = dTau * (b / (2.0 * dZ) + sigma2 / (2.0 * dZ * dZ));
        c.zMinus = dTau * (-b / (2.0 * dZ) + sigma2 / (2.0 * dZ * dZ));
        c.couple.assign(static_cast<std::size_t>(regimes_), 0.0);
        for (int l2 = 0; l2 < regimes_; ++l2) {
            if (l2 != l) c.couple[static_cast<std::size_t>(l2)] = dTau * spec.generator.rate(l, l2);
        }
    }

    const int nK = controls_.size();
    expZ_.resize(static_cast<std::size_t>(grid.nZ) + 1);
    phiS_.resize((static_cast<std::size_t>(grid.nZ) + 1) * static_cast<std::size_t>(nK));
    if (nK > 1) dPhiS_.resize((static_cast<std::size_t>(grid.nZ) + 1) * (nK - 1));
    for (int j = 0; j <= grid.nZ; ++j) {
        expZ_[static_cast<std::size_t>(j)] = grid.s_of(j);
        for (int k = 0; k < nK; ++k) {
            phiS_[static_cast<std::size_t>(j) * nK + k] =
                controls_.phiValues[static_cast<std::size_t>(k)] * expZ_[static_cast<std::size_t>(j)];
        }
        for (int k = 0; k + 1 < nK; ++k) {
            dPhiS_[static_cast<std::size_t>(j) * (nK - 1) + k] =
                controls_.phiDiffs[static_cast<std::size_t>(k)] * expZ_[static_cast<std::size_t>(j)];
        }
    }
    ghostDown_ = std::exp(-dZ);
    ghostUp_ = std::exp(dZ);
}

Stepper::Coefficients Stepper::coefficients(int regime) const {
    return coeffs_.at(static_cast<std::size_t>(regime));
}

void Stepper::apply(const double* prev, double* next, std::uint16_t* policyOut) const {
    const int nX = grid_.nX;
    const int nZ = grid_.nZ;
    const int m = regimes_;
    const int nK = controls_.size();
    const std::size_t rowLen = static_cast<std::size_t>(nZ) + 1;
    const std::size_t plane = static_cast<std::size_t>(nX + 1) * rowLen;
    const double invDX = 1.0 / grid_.dX;
    const double inv2DX = 0.5 / grid_.dX;
    const double inv2DZ = 0.5 / grid_.dZ;
    const double dTau = grid_.dTau;
    const double* uVals = controls_.values.data();
    const double* uDiffs = controls_.rateDiffs.data();

    parallel_for(static_cast<std::size_t>(m) * (nX + 1), workers_,
                 [&](std::size_t lo, std::size_t hi) {
        for (std::size_t row = lo; row < hi; ++row) {
            const int l = static_cast<int>(row / static_cast<std::size_t>(nX + 1));
            const int i = static_cast<int>(row % static_cast<std::size_t>(nX + 1));
            double* out = next + static_cast<std::size_t>(l) * plane + i * rowLen;
            std::uint16_t* pol =
                policyOut ? policyOut + static_cast<std::size_t>(l) * plane + i * rowLen : nullptr;
            if (i == 0) {
                // absorbing boundary: no shares left, value 0, nothing to sell
                std::fill(out, out + rowLen, 0.0);
                if (pol) std::fill(pol, pol + rowLen, std::uint16_t{0});
                continue;
            }
            const double* self = prev + static_cast<std::size_t>(l) * plane + i * rowLen;
            const double* below = self - rowLen;
            const double* above = i < nX ? self + rowLen : nullptr;
            const Coefficients& c = coeffs_[static_cast<std::size_t>(l)];
            for (int j = 0; j <= nZ; ++j) {
                const double w = self[j];
                const double wzp = j < nZ ? self[j + 1] : w * ghostUp_;
                const double wzm = j > 0 ? self[j - 1] : w * ghostDown_;
                double acc = c.diag * w + c.zPlus * wzp + c.zMinus * wzm;
                for (int l2 = 0; l2 < m; ++l2) {
                    acc += c.couple[static_cast<std::size_t>(l2)] *
                           prev[static_cast<std::size_t>(l2) * plane + i * rowLen +
                                static_cast<std::size_t>(j)];
                }
                const double dxw = (scheme_ == Scheme::UpwindX || i == nX)
                                       ? (w - below[j]) * invDX
                                       : (above[j] - below[j]) * inv2DX;
                double pEff = dxw;
                if (lambda_ != 0.0) pEff += lambda_ * (wzp - wzm) * inv2DZ;
                const double* phiRow = phiS_.data() + static_cast<std::size_t>(j) * nK;
                const double* dPhiRow =
                    nK > 1 ? dPhiS_.data() + static_cast<std::size_t>(j) * (nK - 1) : nullptr;
                const auto [k, fBest] = scan_controls(uVals, phiRow, uDiffs, dPhiRow, nK, pEff);
                out[j] = acc + dTau * fBest;
                if (pol) pol[j] = static_cast<std::uint16_t>(k);
            }
        }
    });

    const std::size_t total = static_cast<std::size_t>(m) * plane;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!std::isfinite(next[idx])) {
            const int l = static_cast<int>(idx / plane);
            const std::size_t rem = idx % plane;
            char buf[96];
            std::snprintf(buf, sizeof(buf), "non-finite value at x-index %d, z-index %d, regime %d",
                          static_cast<int>(rem / rowLen), static_cast<int>(rem % rowLen), l + 1);
            throw Error("NonFiniteValue", buf);
        }
    }
}

// ------------------------------------------------------------------ solve --

SolveResult solve(const ProblemSpec& spec, const GridSpec& grid, const SolveOptions& options) {
    const StabilityReport report = check_stability(grid, spec, options.scheme);
    if (!report.pass && !options.forceUnstable) {
        char buf[192];
        if (!report.dTauOk) {
            std::snprintf(buf, sizeof(buf),
                          "dTau = %.9g exceeds the explicit-scheme bound %.9g (binding regime %d); "
                          "refusing to march",
                          grid.dTau, report.maxDTau, report.bindingRegime + 1);
        } else {
            std::snprintf(buf, sizeof(buf),
                          "dZ = %.9g violates the central z-difference monotonicity bound; "
                          "refusing to march",
                          grid.dZ);
        }
        throw Error("StabilityRefused", buf);
    }

    const int m = spec.regimes();
    Stepper stepper(spec, grid, options.scheme, options.workers);
    ValueField values(grid, m, options.storeFullValues);
    PolicyField policy;
    if (options.storePolicy) policy = PolicyField(grid, m, stepper.controls().values);

    std::vector<double> terminal = init_terminal(grid, spec.impact, m);
    const std::size_t size = values.slice_size();

    if (options.storeFullValues) {
        std::copy(terminal.begin(), terminal.end(), values.slice(0));
        for (int n = 0; n < grid.nTau; ++n) {
            stepper.apply(values.slice(n), values.slice(n + 1),
                          options.storePolicy ? policy.slice(n + 1) : nullptr);
        }
    } else {
        std::vector<double> scratch(size, 0.0);
        double* cur = terminal.data();
        double* nxt = scratch.data();
        for (int n = 0; n < grid.nTau; ++n) {
            stepper.apply(cur, nxt, options.storePolicy ? policy.slice(n + 1) : nullptr);
            std::swap(cur, nxt);
        }
        std::copy(cur, cur + size, values.slice(grid.nTau));
    }

    return {std::move(values), std::move(policy), report};
}

// --------------------------------------------------------------- readback --

double value_at(const ValueField& field, double t, double x, double s, int l) {
    const GridSpec& grid = field.grid();
    const int n = snap_time_to_step(grid, t);
    const double* slice = field.slice(n);

    const double fi = std::clamp(x / grid.dX, 0.0, static_cast<double>(grid.nX));
    const double fj = std::clamp((std::log(s) - grid.zMin) / grid.dZ, 0.0,
                                 static_cast<double>(grid.nZ));
    const int i0 = std::min(static_cast<int>(fi), grid.nX - 1);
    const int j0 = std::min(static_cast<int>(fj), grid.nZ - 1);
    const double wx = fi - i0;
    const double wz = fj - j0;

    const std::size_t rowLen = static_cast<std::size_t>(grid.nZ) + 1;
    const std::size_t base =
        (static_cast<std::size_t>(l) * (grid.nX + 1) + static_cast<std::size_t>(i0)) * rowLen +
        static_cast<std::size_t>(j0);
    const double w00 = slice[base];
    const double w01 = slice[base + 1];
    const double w10 = slice[base + rowLen];
    const double w11 = slice[base + rowLen + 1];
    return (1.0 - wx) * ((1.0 - wz) * w00 + wz * w01) + wx * ((1.0 - wz) * w10 + wz * w11);
}

PolicySlice extract_policy_slice(const PolicyField& policy, double t) {
    const GridSpec& grid = policy.grid();
    PolicySlice out;
    out.step = snap_time_to_step(grid, t);
    out.tSnapped = grid.t_of(out.step);
    out.rows.reserve(static_cast<std::size_t>(policy.regimes()) * (grid.nX + 1) * (grid.nZ + 1));
    for (int l = 0; l < policy.regimes(); ++l) {
        for (int i = 0; i <= grid.nX; ++i) {
            for (int j = 0; j <= grid.nZ; ++j) {
                out.rows.push_back({l + 1, out.tSnapped, grid.x_of(i), grid.s_of(j),
                                    policy.rate_at(out.step, i, j, l)});
            }
        }
    }
    return out;
}

// ------------------------------------------------------------ convergence --

ConvergenceReport convergence_study(const ProblemSpec& spec, int baseNX, int baseNZ, int levels,
                                    Scheme scheme, const std::vector<ReferencePoint>& points,
                                    int workers) {
    if (levels < 2) throw Error("InvalidCounts", "a convergence study needs at least 2 levels");
    ConvergenceReport report;
    SolveOptions options;
    options.scheme = scheme;
    options.storeFullValues = false;
    options.storePolicy = false;
    options.workers = workers;

    for (int level = 0; level < levels; ++level) {
        const int nX = baseNX << level;
        const int nZ = baseNZ << level;
        const GridSpec grid = build_grid_auto_tau(spec, nX, nZ, scheme);
        const SolveResult result = solve(spec, grid, options);

        ConvergenceLevel row;
        row.nX = nX;
        row.nZ = nZ;
        row.nTau = grid.nTau;
        row.dTau = grid.dTau;
        row.values.reserve(points.size());
        for (const ReferencePoint& pt : points) {
            std::vector<double> perRegime(static_cast<std::size_t>(spec.regimes()));
            for (int l = 0; l < spec.regimes(); ++l) {
                perRegime[static_cast<std::size_t>(l)] = value_at(result.values, 0.0, pt.x, pt.s, l);
            }
            row.values.push_back(std::move(perRegime));
        }
        report.levels.push_back(std::move(row));
    }

    for (std::size_t k = 0; k + 1 < report.levels.size(); ++k) {
        std::vector<std::vector<double>> gap;
        for (std::size_t p = 0; p < points.size(); ++p) {
            std::vector<double> perRegime(static_cast<std::size_t>(spec.regimes()));
            for (int l = 0; l < spec.regimes(); ++l) {
                perRegime[static_cast<std::size_t>(l)] =
                    std::abs(report.levels[k + 1].values[p][static_cast<std::size_t>(l)] -
                             report.levels[k].values[p][static_cast<std::size_t>(l)]);
            }
            gap.push_back(std::move(perRegime));
        }
        report.gaps.push_back(std::move(gap));
    }
    return report;
}

}  // namespace liquidex
