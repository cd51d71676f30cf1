#include "liquidex/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace liquidex {

namespace {
constexpr double kRowSumTol = 1e-12;
}

Validated<GeneratorMatrix> validate_generator(const std::vector<std::vector<double>>& rows) {
    IssueList issues;
    const int m = static_cast<int>(rows.size());
    if (m == 0) {
        issues.push_back({"NonSquare", "generator has no rows"});
        return make_invalid<GeneratorMatrix>(std::move(issues));
    }
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(rows[i].size()) != m) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "row %d has %zu entries, expected %d", i + 1,
                          rows[i].size(), m);
            issues.push_back({"NonSquare", buf});
        }
    }
    if (!issues.empty()) return make_invalid<GeneratorMatrix>(std::move(issues));

    std::vector<double> flat(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < m; ++j) {
            const double v = rows[i][j];
            if (!std::isfinite(v)) {
                char buf[96];
                std::snprintf(buf, sizeof(buf), "entry (%d,%d) is not finite", i + 1, j + 1);
                issues.push_back({"NegativeOffDiagonal", buf});
            } else if (i != j && v < 0.0) {
                char buf[96];
                std::snprintf(buf, sizeof(buf), "entry (%d,%d) = %g is negative", i + 1, j + 1, v);
                issues.push_back({"NegativeOffDiagonal", buf});
            }
            row_sum += v;
            flat[static_cast<std::size_t>(i) * m + j] = v;
        }
        if (std::abs(row_sum) > kRowSumTol) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "row %d sums to %g", i + 1, row_sum);
            issues.push_back({"RowSumNonzero", buf});
        }
    }
    if (!issues.empty()) return make_invalid<GeneratorMatrix>(std::move(issues));
    return make_valid(GeneratorMatrix(m, std::move(flat)));
}

std::vector<double> GeneratorMatrix::stationary_distribution() const {
    const int m = m_;
    if (m == 1) return {1.0};

    // Uniformization: P = I + Q / eta with eta > max exit rate, then iterate
    // pi <- pi P until the update is below tolerance.
    double eta = 0.0;
    for (int i = 0; i < m; ++i) eta = std::max(eta, exit_rate(i));
    if (eta <= 0.0) {  // no transitions at all: any distribution is stationary
        return std::vector<double>(m, 1.0 / m);
    }
    eta *= 1.5;

    std::vector<double> pi(m, 1.0 / m), next(m);
    for (int iter = 0; iter < 200000; ++iter) {
        for (int j = 0; j < m; ++j) {
            double acc = pi[j];
            for (int i = 0; i < m; ++i) acc += pi[i] * rate(i, j) / eta;
            next[j] = acc;
        }
        double delta = 0.0, total = 0.0;
        for (int j = 0; j < m; ++j) {
            delta = std::max(delta, std::abs(next[j] - pi[j]));
            total += next[j];
        }
        for (int j = 0; j < m; ++j) pi[j] = next[j] / total;
        if (delta < 1e-15) break;
    }
    return pi;
}

}  // namespace liquidex
