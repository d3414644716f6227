#pragma once

#include <cstddef>
#include <functional>

namespace lmg {

// Worker count used when a call passes threads = 0. Starts at the machine's
// hardware concurrency.
std::size_t default_threads();
void set_default_threads(std::size_t threads);

// Calls body(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once; callers write into per-index slots, so results never
// depend on the worker count. After a failure no new indices start; the
// exception of the lowest failing index is rethrown once workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace lmg
