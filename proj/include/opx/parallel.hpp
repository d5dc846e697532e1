#pragma once
#include <cstddef>
#include <functional>

namespace opx {

// Worker count for grid sweeps. 0 means "not set": OPX_THREADS, else the
// number of logical cores.
void set_threads(int n);
int threads();

// Calls f(i) for i in [0, count) on up to threads() workers. Callers write
// into per-index slots and reduce in index order afterwards, so results do
// not depend on the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& f);

}  // namespace opx
