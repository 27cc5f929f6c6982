#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace keceni {

/// Thread count from an explicit request, else `KECENI_THREADS`, else 1.
int resolve_threads(int requested = 0);

/// Runs body(k) for k in [0, count) on at most `threads` workers. Each index is
/// visited exactly once; callers write into per-index slots so results never
/// depend on scheduling.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation; fixed association order for a given length.
double pairwise_sum(std::span<const double> values);

}  // namespace keceni
