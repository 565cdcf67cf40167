#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace zoblock {

// Runs body(i) for i in [0, count) on up to `jobs` threads. Indices are handed
// out in order; the first exception (lowest index) is rethrown after all
// workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body);

}  // namespace zoblock
