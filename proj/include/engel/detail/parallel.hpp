// Deterministic parallel sweep helper.
//
// Work items are indexed 0..n-1 and each result depends only on its index,
// so the output vector (and any fixed-order reduction over it) is identical
// for every thread count and scheduling order.
#pragma once

#include <cstddef>
#include <functional>
#include <type_traits>
#include <vector>

namespace engel::detail {

// Worker count resolution: explicit argument if > 0, else the
// ENGEL_SPECTRA_THREADS environment variable, else hardware concurrency.
unsigned thread_count(unsigned requested = 0);

// Runs fn(i) for i in [0, n); used through parallel_map below.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

template <class F>
auto parallel_map(std::size_t n, F&& fn, unsigned threads = 0)
    -> std::vector<std::invoke_result_t<F, std::size_t>> {
    using R = std::invoke_result_t<F, std::size_t>;
    std::vector<R> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = fn(i); }, threads);
    return out;
}

} // namespace engel::detail
