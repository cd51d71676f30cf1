#pragma once

#include <vector>

#include "liquidex/errors.hpp"

namespace liquidex {

// Transition-rate matrix of the modulating Markov chain. Off-diagonal
// entries are jump intensities; every row sums to zero.
class GeneratorMatrix {
public:
    int size() const noexcept { return m_; }

    double rate(int from, int to) const { return q_[static_cast<std::size_t>(from) * m_ + to]; }

    // total jump intensity out of `from` (= -q[from][from], >= 0)
    double exit_rate(int from) const { return -rate(from, from); }

    const std::vector<double>& flat() const noexcept { return q_; }

    // Stationary distribution pi with pi Q = 0, sum pi = 1. Solved by the
    // power method on the uniformized chain; exact for any irreducible chain
    // and for the trivial 1-state case.
    std::vector<double> stationary_distribution() const;

    friend Validated<GeneratorMatrix> validate_generator(
        const std::vector<std::vector<double>>& rows);

private:
    GeneratorMatrix(int m, std::vector<double> q) : m_(m), q_(std::move(q)) {}

    int m_ = 0;
    std::vector<double> q_;
};

// Checks squareness, nonnegative off-diagonals and zero row sums
// (absolute tolerance 1e-12). Issue codes: NonSquare,
// NegativeOffDiagonal, RowSumNonzero.
Validated<GeneratorMatrix> validate_generator(const std::vector<std::vector<double>>& rows);

}  // namespace liquidex
