#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nemfp {

// Runs fn(i) for i in [0, n) over contiguous chunks on `workers` threads.
// Results must be written to per-index slots so the outcome does not depend
// on the worker count. The exception from the lowest failing chunk is
// rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    const std::size_t w = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t c = 0; c < w; ++c) {
        const std::size_t lo = n * c / w;
        const std::size_t hi = n * (c + 1) / w;
        threads.emplace_back([&, lo, hi, c] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace nemfp
