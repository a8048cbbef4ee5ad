// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace vixml {

/// Worker count used when a caller passes 0.
unsigned default_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = default).
/// Work is striped statically; callers write results into per-index slots so
/// the output never depends on scheduling. The first exception (by index
/// order of the worker that raised it) is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace vixml
