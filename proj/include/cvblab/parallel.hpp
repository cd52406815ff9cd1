#pragma once

#include <cstddef>
#include <functional>

namespace cvb {

// Worker cap for all parallel loops. 0 means "use CVB_LAB_THREADS if set,
// else hardware concurrency".
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and `grain`, never on the worker count, so per-index work
// stays reproducible.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)> &body);

}  // namespace cvb
