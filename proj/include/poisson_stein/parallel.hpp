#pragma once

#include <cstddef>
#include <functional>

namespace pstein {

// Worker count: explicit override, else POISSON_STEIN_THREADS, else hardware.
std::size_t default_threads();
void set_default_threads(std::size_t threads);

// Runs body(begin, end) over a fixed partition of [0, n). Callers write results
// by index and reduce afterwards in index order, so output never depends on
// the worker count.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace pstein
