#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace liquidex {

// Resolves the worker count: explicit request > LIQUIDEX_WORKERS > hardware.
// Always at least 1.
int resolve_workers(int requested);

// Runs fn(begin, end) over a partition of [0, n) on `workers` threads.
// Each index is processed exactly once; callers must write disjoint outputs
// per index so results do not depend on the partition.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// Fixed-shape pairwise summation; the reduction tree depends only on the
// length, so the result is identical no matter how the values were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace liquidex
