// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace ghs {

/// Worker count from GHSPLAT_THREADS (0 or unset = hardware concurrency).
int worker_count();

/// Runs fn(i) for i in [0, count). Work items are claimed dynamically, so fn
/// must only write state owned by item i. The first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

} // namespace ghs
