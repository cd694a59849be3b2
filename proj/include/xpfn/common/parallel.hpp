// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace xpfn {

// Number of worker threads to use when the caller passes 0.
std::size_t default_thread_count();

// Runs body(i) for i in [0, count) on up to `threads` threads. Each index is
// visited exactly once; the first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace xpfn
