#pragma once

#include <cstddef>
#include <functional>

namespace greg {

// Global worker cap for all parallel loops (CLI --threads). 0 means "use
// hardware concurrency". Set once at startup; reads are atomic.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n). Work items must be independent; each writes
// only its own output slot, so results match the serial loop for any thread
// count. With max_threads() == 1 the loop runs inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Runs fn(chunk, begin, end) over contiguous ranges, one chunk per worker.
// Chunk-local accumulators must be combined by the caller in chunk order.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& fn,
                     std::size_t* num_chunks_out = nullptr);

}  // namespace greg
