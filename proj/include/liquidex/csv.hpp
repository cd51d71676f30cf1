#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liquidex/simulate.hpp"
#include "liquidex/solver.hpp"

namespace liquidex {

// Deterministic CSV emission: every number is printed with %.17g so files
// are byte-identical across runs and round-trip through text exactly.

// Header `regime,t,x,s,value`; rows ordered (regime, x, z), regimes 1-based.
std::string value_slice_csv(const ValueField& values, int step);

// Header `regime,t,x,s,control`, same ordering.
std::string policy_slice_csv(const PolicySlice& slice);

// Header `path,seed,J,Jdynkin,exit_time,exited_early`; seed is the per-path
// sub-seed actually fed to the path's generator.
std::string paths_csv(const std::vector<PathOutcome>& outcomes, std::uint64_t seed);

// Header `level,n_x,n_z,n_tau,d_tau,x,s,regime,value,gap`; the gap column is
// empty on the coarsest level and |value - previous level's value| after.
std::string convergence_csv(const ConvergenceReport& report,
                            const std::vector<ReferencePoint>& points);

// Writes `contents` to `path`, throwing Error("IoFailure") on any problem.
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace liquidex
