// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace rpda {

/// Number of worker threads used by the parallel loops. 0 selects the
/// hardware concurrency.
void set_worker_count(unsigned n);
unsigned worker_count();

/// Runs fn(i) for i in [0, n). Work items are claimed dynamically but every
/// caller writes results into slots indexed by i and reduces them in index
/// order afterwards, so outputs do not depend on the thread count.
/// The first exception thrown by any item is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned jobs = 0);

/// Pairwise sum of a contiguous range; fixed association order.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace rpda
