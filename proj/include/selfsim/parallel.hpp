#pragma once

#include <cstddef>
#include <functional>

namespace selfsim {

//! Thread cap used when a caller passes threads = 0: the SELFSIM_THREADS
//! environment variable if set, else the hardware concurrency.
int default_threads();

//! Runs body(begin, end) over a static split of [0, count). Results must not
//! depend on the split; every caller keys randomness by item index.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

} // namespace selfsim
